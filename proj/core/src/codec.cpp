#include "qpkt/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "bytes.hpp"
#include "huffman.hpp"

namespace qpkt {
namespace {

using detail::ByteReader;
using detail::ByteWriter;

constexpr char kMagic[4] = {'Q', 'P', 'K', 'T'};
constexpr uint16_t kVersion = 1;
constexpr size_t kMaxDims = 16;

std::vector<size_t> row_major_strides(std::span<const size_t> shape) {
    std::vector<size_t> stride(shape.size());
    size_t s = 1;
    for (size_t d = shape.size(); d-- > 0;) {
        stride[d] = s;
        s *= shape[d];
    }
    return stride;
}

void step_coord(std::span<const size_t> shape, std::vector<size_t>& coord) {
    for (size_t d = shape.size(); d-- > 0;) {
        if (++coord[d] < shape[d]) return;
        coord[d] = 0;
    }
}

// First-order Lorenzo stencil: inclusion-exclusion over the corner of
// already-visited neighbors.  Out-of-range and non-finite neighbors
// contribute zero, identically on both codec sides.
struct Stencil {
    struct Term {
        size_t offset;
        double sign;
        uint32_t mask;
    };
    std::vector<Term> terms;
    size_t ndim;

    explicit Stencil(std::span<const size_t> shape) : ndim(shape.size()) {
        auto stride = row_major_strides(shape);
        for (uint32_t m = 1; m < (1u << ndim); ++m) {
            size_t off = 0;
            int bits = 0;
            for (size_t d = 0; d < ndim; ++d)
                if (m >> d & 1) {
                    off += stride[d];
                    ++bits;
                }
            terms.push_back({off, bits % 2 ? 1.0 : -1.0, m});
        }
    }

    double predict(const double* recon, std::span<const size_t> coord,
                   size_t i) const {
        double p = 0.0;
        for (const Term& t : terms) {
            bool in_range = true;
            for (size_t d = 0; d < ndim && in_range; ++d)
                if ((t.mask >> d & 1) && coord[d] == 0) in_range = false;
            if (!in_range) continue;
            double v = recon[i - t.offset];
            if (std::isfinite(v)) p += t.sign * v;
        }
        return p;
    }
};

void check_shape(std::span<const size_t> shape) {
    if (shape.empty()) throw std::invalid_argument("field has no shape");
    if (shape.size() > kMaxDims)
        throw std::invalid_argument("too many dimensions");
    for (size_t d : shape)
        if (d == 0) throw std::invalid_argument("zero-extent dimension");
}

}  // namespace

uint8_t level_for_bound(double bound, double eps_global) {
    if (!(eps_global > 0.0) || !std::isfinite(eps_global) || !(bound > 0.0))
        return kLosslessLevel;
    if (bound >= eps_global) return 0;
    int k = static_cast<int>(std::ceil(std::log2(eps_global / bound))) - 2;
    if (k < 0) k = 0;
    for (; k <= static_cast<int>(kMaxLevel); ++k)
        if (std::ldexp(eps_global, -k) <= bound) return static_cast<uint8_t>(k);
    return kLosslessLevel;
}

std::vector<uint8_t> quantize_bounds(std::span<const double> bounds,
                                     double eps_global) {
    std::vector<uint8_t> out(bounds.size());
    for (size_t i = 0; i < bounds.size(); ++i)
        out[i] = level_for_bound(bounds[i], eps_global);
    return out;
}

double level_bound(uint8_t level, double eps_global) {
    if (level >= kLosslessLevel) return 0.0;
    return std::ldexp(eps_global, -static_cast<int>(level));
}

FieldStreams encode_streams(const Field& f, std::span<const double> bounds,
                            double eps_global) {
    const size_t n = f.size();
    if (bounds.size() != n)
        throw std::invalid_argument("one bound per value required");
    check_shape(f.shape);
    const bool narrow = f.dtype == Dtype::F32;

    std::vector<uint8_t> levels = quantize_bounds(bounds, eps_global);
    double level_eb[kLosslessLevel] = {};
    for (int k = 0; k < kLosslessLevel; ++k)
        level_eb[k] = std::ldexp(eps_global, -k);

    Stencil st(f.shape);
    std::vector<double> recon(n);
    std::vector<uint16_t> syms(n, 0);
    ByteWriter outw;
    FieldStreams out;
    std::vector<size_t> coord(f.shape.size(), 0);
    for (size_t i = 0; i < n; ++i, step_coord(f.shape, coord)) {
        const double x = f.values[i];
        const uint8_t lv = levels[i];
        const double pred = st.predict(recon.data(), coord, i);
        bool escape = lv >= kLosslessLevel;
        double rec = narrow ? static_cast<double>(static_cast<float>(x)) : x;
        if (!escape) {
            const double eb = level_eb[lv];
            const double q = (x - pred) / (2.0 * eb);
            int64_t bin = 0;
            if (std::fabs(q) < 32768.0) bin = std::llround(q);
            if (!(std::fabs(q) < 32768.0) || std::llabs(bin) > kMaxBin) {
                escape = true;
            } else {
                double cand = pred + 2.0 * eb * static_cast<double>(bin);
                if (narrow) cand = static_cast<double>(static_cast<float>(cand));
                if (!(std::fabs(cand - x) <= eb)) {
                    escape = true;
                } else {
                    syms[i] = static_cast<uint16_t>(bin + 32768);
                    rec = cand;
                }
            }
        }
        if (escape) {
            outw.u64(i);
            outw.value(x, f.dtype);
            ++out.n_outliers;
            if (lv >= kLosslessLevel) ++out.n_lossless;
        }
        recon[i] = rec;
    }

    std::vector<uint16_t> lsyms(levels.begin(), levels.end());
    out.levels = detail::deflate_bytes(detail::huffman_pack(lsyms));
    out.quants = detail::deflate_bytes(detail::huffman_pack(syms));
    out.outliers = detail::deflate_bytes(outw.bytes());
    return out;
}

namespace {

void write_qoi_block(ByteWriter& w, const QoiSpec& q) {
    w.str(q.text);
    w.u32(static_cast<uint32_t>(q.vars.size()));
    for (const auto& v : q.vars) w.str(v);
    w.u32(static_cast<uint32_t>(q.block.size()));
    for (size_t b : q.block) w.u64(b);
    w.u8(static_cast<uint8_t>(q.coeff_rule));
    w.u32(static_cast<uint32_t>(q.weights.size()));
    for (double wt : q.weights) w.f64(wt);
    w.f64(q.constant);
    w.u32(static_cast<uint32_t>(q.arity));
}

QoiSpec read_qoi_block(ByteReader& r, uint8_t kind) {
    std::string text = r.str();
    std::vector<std::string> vars(r.u32());
    for (auto& v : vars) v = r.str();
    std::vector<size_t> block(r.u32());
    for (auto& b : block) b = r.u64();
    uint8_t rule = r.u8();
    std::vector<double> weights(r.u32());
    for (auto& wt : weights) wt = r.f64();
    double constant = r.f64();
    uint32_t arity = r.u32();

    QoiSpec spec;
    try {
        switch (kind) {
            case 1:
                spec = make_univariate_qoi(text);
                break;
            case 2:
                spec = make_regional_qoi(text, std::move(block),
                                         static_cast<CoeffRule>(rule),
                                         std::move(weights), constant);
                break;
            case 3:
                spec = make_multivariate_qoi(text, std::move(vars));
                break;
            default:
                throw CodecError("unknown quantity kind");
        }
    } catch (const std::exception& e) {
        throw CodecError(std::string("bad quantity block: ") + e.what());
    }
    if (spec.arity != arity) throw CodecError("bad quantity block: arity");
    return spec;
}

struct Parsed {
    ArchiveHeader hdr;
    uint64_t len[4] = {};
    uint32_t crc = 0;
    size_t payload_pos = 0;
};

Parsed parse_header(std::span<const std::byte> a) {
    ByteReader r(a);
    auto magic = r.raw(4);
    if (std::memcmp(magic.data(), kMagic, 4) != 0)
        throw CodecError("not an archive");
    if (r.u16() != kVersion) throw CodecError("unsupported archive version");

    Parsed p;
    uint8_t width = r.u8();
    if (width != 4 && width != 8) throw CodecError("bad stored width");
    p.hdr.dtype = static_cast<Dtype>(width);
    uint8_t qoi_kind = r.u8();
    uint32_t ndim = r.u32();
    if (ndim == 0 || ndim > kMaxDims) throw CodecError("bad dimension count");
    p.hdr.shape.resize(ndim);
    size_t total = 1;
    for (auto& d : p.hdr.shape) {
        d = r.u64();
        if (d == 0) throw CodecError("zero-extent dimension");
        total *= d;
    }
    p.hdr.eps_user = r.f64();
    p.hdr.eps_global = r.f64();
    p.hdr.tau_abs = r.f64();
    p.hdr.tune_c = r.f64();
    p.hdr.tune_beta = r.f64();
    p.hdr.tune_c0 = r.f64();
    p.hdr.n_values = r.u64();
    p.hdr.n_outliers = r.u64();
    p.hdr.n_corrections = r.u64();
    if (p.hdr.n_values != total)
        throw CodecError("shape/value count mismatch");
    if (qoi_kind != 0) p.hdr.qoi = read_qoi_block(r, qoi_kind);
    for (auto& l : p.len) l = r.u64();
    p.crc = r.u32();
    p.payload_pos = r.pos();
    return p;
}

}  // namespace

std::vector<std::byte> assemble_archive(const ArchiveHeader& hdr,
                                        const FieldStreams& s,
                                        std::span<const Correction> corrections) {
    check_shape(hdr.shape);
    ByteWriter cw;
    cw.u64(corrections.size());
    for (const Correction& c : corrections) {
        cw.u64(c.index);
        cw.value(c.value, hdr.dtype);
    }
    std::vector<std::byte> corr = detail::deflate_bytes(cw.bytes());

    ByteWriter w;
    w.raw(std::as_bytes(std::span(kMagic)));
    w.u16(kVersion);
    w.u8(static_cast<uint8_t>(dtype_bytes(hdr.dtype)));
    w.u8(hdr.qoi ? static_cast<uint8_t>(hdr.qoi->kind) : 0);
    w.u32(static_cast<uint32_t>(hdr.shape.size()));
    for (size_t d : hdr.shape) w.u64(d);
    w.f64(hdr.eps_user);
    w.f64(hdr.eps_global);
    w.f64(hdr.tau_abs);
    w.f64(hdr.tune_c);
    w.f64(hdr.tune_beta);
    w.f64(hdr.tune_c0);
    w.u64(hdr.n_values);
    w.u64(s.n_outliers);
    w.u64(corrections.size());
    if (hdr.qoi) write_qoi_block(w, *hdr.qoi);
    w.u64(s.levels.size());
    w.u64(s.quants.size());
    w.u64(s.outliers.size());
    w.u64(corr.size());
    uint32_t crc = detail::crc32_bytes(0, s.levels);
    crc = detail::crc32_bytes(crc, s.quants);
    crc = detail::crc32_bytes(crc, s.outliers);
    crc = detail::crc32_bytes(crc, corr);
    w.u32(crc);
    w.raw(s.levels);
    w.raw(s.quants);
    w.raw(s.outliers);
    w.raw(corr);
    return w.take();
}

ArchiveHeader peek_header(std::span<const std::byte> archive) {
    return parse_header(archive).hdr;
}

Field decode_archive(std::span<const std::byte> archive,
                     ArchiveHeader* hdr_out) {
    Parsed p = parse_header(archive);
    ByteReader r(archive);
    r.raw(p.payload_pos);
    std::span<const std::byte> stream[4];
    for (int i = 0; i < 4; ++i) stream[i] = r.raw(p.len[i]);
    uint32_t crc = 0;
    for (const auto& s : stream) crc = detail::crc32_bytes(crc, s);
    if (crc != p.crc) throw CodecError("checksum mismatch");

    const size_t n = p.hdr.n_values;
    std::vector<uint16_t> levels =
        detail::huffman_unpack(detail::inflate_bytes(stream[0]));
    std::vector<uint16_t> syms =
        detail::huffman_unpack(detail::inflate_bytes(stream[1]));
    if (levels.size() != n || syms.size() != n)
        throw CodecError("stream length mismatch");
    std::vector<std::byte> outlier_raw = detail::inflate_bytes(stream[2]);
    ByteReader outr(outlier_raw);

    const bool narrow = p.hdr.dtype == Dtype::F32;
    const double eps_global = p.hdr.eps_global;
    Stencil st(p.hdr.shape);
    std::vector<double> recon(n);
    std::vector<size_t> coord(p.hdr.shape.size(), 0);
    for (size_t i = 0; i < n; ++i, step_coord(p.hdr.shape, coord)) {
        const double pred = st.predict(recon.data(), coord, i);
        double rec;
        if (syms[i] == 0) {
            if (outr.u64() != i) throw CodecError("outlier stream out of order");
            rec = outr.value(p.hdr.dtype);
        } else {
            if (levels[i] >= kLosslessLevel)
                throw CodecError("level/stream mismatch");
            const double eb =
                std::ldexp(eps_global, -static_cast<int>(levels[i]));
            const int64_t bin = static_cast<int64_t>(syms[i]) - 32768;
            rec = pred + 2.0 * eb * static_cast<double>(bin);
            if (narrow) rec = static_cast<double>(static_cast<float>(rec));
        }
        recon[i] = rec;
    }
    if (outr.remaining() != 0) throw CodecError("trailing outlier data");

    std::vector<std::byte> corr_raw = detail::inflate_bytes(stream[3]);
    ByteReader cr(corr_raw);
    uint64_t n_corr = cr.u64();
    if (n_corr != p.hdr.n_corrections)
        throw CodecError("correction count mismatch");
    for (uint64_t c = 0; c < n_corr; ++c) {
        uint64_t idx = cr.u64();
        if (idx >= n) throw CodecError("correction index out of range");
        recon[idx] = cr.value(p.hdr.dtype);
    }

    if (hdr_out) *hdr_out = p.hdr;
    Field f;
    f.shape = p.hdr.shape;
    f.dtype = p.hdr.dtype;
    f.values = std::move(recon);
    return f;
}

uint64_t estimate_compressed_size(const Field& f, double eps) {
    if (!(std::isfinite(eps) && eps > 0.0))
        throw std::invalid_argument("sample bound must be positive and finite");
    if (f.size() < 2)
        throw std::invalid_argument("sample needs at least two values");
    check_shape(f.shape);

    const size_t nd = f.shape.size();
    const size_t cap = nd == 1 ? 65536 : nd == 2 ? 512 : 64;
    std::vector<size_t> ext(nd), origin(nd);
    for (size_t d = 0; d < nd; ++d) {
        ext[d] = std::min(f.shape[d], cap);
        origin[d] = (f.shape[d] - ext[d]) / 2;
    }
    auto stride = row_major_strides(f.shape);

    Field sub;
    sub.shape = ext;
    sub.dtype = f.dtype;
    sub.values.resize(sub.size());
    std::vector<size_t> coord(nd, 0);
    for (size_t j = 0; j < sub.values.size(); ++j, step_coord(ext, coord)) {
        size_t src = 0;
        for (size_t d = 0; d < nd; ++d) src += (origin[d] + coord[d]) * stride[d];
        sub.values[j] = f.values[src];
    }
    std::vector<double> bounds(sub.values.size(), eps);
    return encode_streams(sub, bounds, eps).byte_size();
}

}  // namespace qpkt
