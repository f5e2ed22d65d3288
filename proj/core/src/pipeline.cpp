#include "qpkt/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "qpkt/validate.hpp"

namespace qpkt {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Relative bounds need a real range to normalize by; degenerate (constant
// or non-finite) data must come with absolute bounds instead.
double checked_width(double lo, double hi, const char* what) {
    double w = hi - lo;
    if (w > 0.0 && std::isfinite(w)) return w;
    throw std::invalid_argument(std::string(what) +
                                " range is degenerate; pass an absolute "
                                "bound instead of a relative one");
}

}  // namespace

double resolve_point_bound(std::span<const Field> fields,
                           const CompressOptions& opt) {
    if (opt.eps_abs > 0.0) {
        if (!std::isfinite(opt.eps_abs))
            throw std::invalid_argument("absolute point bound must be finite");
        return opt.eps_abs;
    }
    if (opt.eps_rel > 0.0) {
        if (!std::isfinite(opt.eps_rel))
            throw std::invalid_argument("relative point bound must be finite");
        double eps = std::numeric_limits<double>::infinity();
        for (const Field& f : fields) {
            auto [lo, hi] = f.value_range();
            eps = std::min(eps, opt.eps_rel * checked_width(lo, hi, "value"));
        }
        return eps;
    }
    throw std::invalid_argument(
        "a point-wise bound is required (absolute or relative)");
}

double resolve_qoi_tolerance(std::span<const Field> fields,
                             const CompressOptions& opt) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    if (!opt.qoi) return kInf;
    if (opt.tau_abs > 0.0) return opt.tau_abs;  // +inf = constraint off
    if (opt.tau_rel > 0.0) {
        if (!std::isfinite(opt.tau_rel))
            throw std::invalid_argument("relative tolerance must be finite");
        const QoiSpec& spec = *opt.qoi;
        double tau = kInf;
        if (spec.arity == 1) {
            for (const Field& f : fields) {
                QoiRange r = qoi_value_range(spec, {&f, 1});
                tau = std::min(tau,
                               opt.tau_rel * checked_width(r.lo, r.hi,
                                                           "quantity output"));
            }
        } else {
            QoiRange r = qoi_value_range(spec, fields);
            tau = opt.tau_rel * checked_width(r.lo, r.hi, "quantity output");
        }
        return tau;
    }
    return kInf;
}

namespace {

void check_inputs(std::span<const Field> fields, const CompressOptions& opt) {
    if (fields.empty()) throw std::invalid_argument("no input fields");
    for (const Field& f : fields)
        if (f.size() == 0 || f.values.size() != f.size())
            throw std::invalid_argument("malformed input field");
    if (opt.qoi && opt.qoi->kind == QoiKind::MultivariateGeneral) {
        if (fields.size() != opt.qoi->arity)
            throw std::invalid_argument("field count does not match arity");
        for (const Field& f : fields)
            if (f.shape != fields[0].shape)
                throw std::invalid_argument("bound fields differ in shape");
    }
}

// Finite-range relative error of the quantity outputs.
double relative_qoi_error(double abs_err, std::span<const double> exact) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : exact)
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    double w = hi - lo;
    if (w > 0.0 && std::isfinite(w)) return abs_err / w;
    return abs_err > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace

CompressResult compress_fields(std::span<const Field> fields,
                               const CompressOptions& opt) {
    check_inputs(fields, opt);
    CompressResult res;
    const auto t0 = Clock::now();
    res.eps_abs = resolve_point_bound(fields, opt);
    res.tau_abs = resolve_qoi_tolerance(fields, opt);

    BoundPlan plan;
    if (opt.qoi) {
        plan = build_plan(fields, *opt.qoi, res.tau_abs, res.eps_abs, opt.tune);
    } else {
        plan.eps_global = res.eps_abs;
        plan.bounds.resize(fields.size());
        for (size_t i = 0; i < fields.size(); ++i)
            plan.bounds[i].assign(fields[i].size(), res.eps_abs);
    }

    bool samplable = true;
    for (const Field& f : fields) samplable = samplable && f.size() >= 2;
    if (opt.tune_global && samplable) {
        SampleSizer sizer = [&fields](double eps) {
            uint64_t total = 0;
            for (const Field& f : fields)
                total += estimate_compressed_size(f, eps);
            return total;
        };
        res.tuning = tune_global_bound(plan, sizer, opt.tune);
    } else {
        res.tuning.eps_global = plan.eps_global;
    }
    clamp_plan(plan);

    const size_t nf = fields.size();
    std::vector<FieldStreams> streams(nf);
    std::vector<ArchiveHeader> hdrs(nf);
    std::vector<Field> decoded(nf);
    for (size_t i = 0; i < nf; ++i) {
        streams[i] = encode_streams(fields[i], plan.bounds[i], plan.eps_global);
        ArchiveHeader& h = hdrs[i];
        h.shape = fields[i].shape;
        h.dtype = fields[i].dtype;
        h.eps_user = res.eps_abs;
        h.eps_global = plan.eps_global;
        h.tau_abs = res.tau_abs;
        h.qoi = opt.qoi;
        h.tune_c = opt.tune.c;
        h.tune_beta = opt.tune.beta;
        h.tune_c0 = opt.tune.c0;
        h.n_values = fields[i].size();
        decoded[i] = decode_archive(assemble_archive(h, streams[i]));
    }

    std::vector<std::vector<Correction>> corr(nf);
    if (opt.qoi && std::isfinite(res.tau_abs)) {
        if (opt.qoi->arity == 1) {
            for (size_t i = 0; i < nf; ++i) {
                auto vr = validate_and_correct(*opt.qoi, {&fields[i], 1},
                                               {&decoded[i], 1}, res.tau_abs);
                corr[i] = std::move(vr.corrections[0]);
                res.n_corrections += vr.n_corrected_points;
            }
        } else {
            auto vr =
                validate_and_correct(*opt.qoi, fields, decoded, res.tau_abs);
            corr = std::move(vr.corrections);
            res.n_corrections = vr.n_corrected_points;
        }
    }

    res.archives.resize(nf);
    for (size_t i = 0; i < nf; ++i)
        res.archives[i] = assemble_archive(hdrs[i], streams[i], corr[i]);
    const double compress_s = seconds_since(t0);

    const auto t1 = Clock::now();
    std::vector<Field> final_dec(nf);
    for (size_t i = 0; i < nf; ++i) final_dec[i] = decode_archive(res.archives[i]);
    const double decompress_s = seconds_since(t1);

    res.reports.resize(nf);
    for (size_t i = 0; i < nf; ++i) {
        QualityReport& r = res.reports[i];
        r.name = i < opt.names.size() && !opt.names[i].empty()
                     ? opt.names[i]
                     : "field" + std::to_string(i);
        r.n_values = fields[i].size();
        r.raw_bytes = fields[i].byte_size();
        r.packed_bytes = res.archives[i].size();
        r.eps_user = res.eps_abs;
        r.eps_global = plan.eps_global;
        r.tau_abs = res.tau_abs;
        r.max_point_err =
            max_point_error({&fields[i], 1}, {&final_dec[i], 1});
        r.n_outliers = streams[i].n_outliers;
        r.n_corrections = corr[i].size();
        r.seconds_compress = compress_s;      // whole-call wall time
        r.seconds_decompress = decompress_s;  // all archives decoded
        res.n_outliers += streams[i].n_outliers;
        res.raw_bytes += r.raw_bytes;
        res.packed_bytes += r.packed_bytes;
        if (r.max_point_err > res.eps_abs)
            throw std::logic_error("internal: point bound violated");
    }

    if (opt.qoi) {
        const QoiSpec& spec = *opt.qoi;
        if (spec.arity == 1) {
            for (size_t i = 0; i < nf; ++i) {
                Field qx = evaluate_qoi(spec, {&fields[i], 1}, true);
                Field qd = evaluate_qoi(spec, {&final_dec[i], 1}, true);
                QualityReport& r = res.reports[i];
                r.max_qoi_err =
                    max_qoi_error(spec, {&fields[i], 1}, {&final_dec[i], 1});
                r.max_qoi_rel_err = relative_qoi_error(r.max_qoi_err, qx.values);
                r.qoi_psnr = psnr(qx.values, qd.values);
            }
        } else {
            Field qx = evaluate_qoi(spec, fields, true);
            Field qd = evaluate_qoi(spec, {final_dec.data(), nf}, true);
            double err = max_qoi_error(spec, fields, {final_dec.data(), nf});
            for (QualityReport& r : res.reports) {
                r.max_qoi_err = err;
                r.max_qoi_rel_err = relative_qoi_error(err, qx.values);
                r.qoi_psnr = psnr(qx.values, qd.values);
            }
        }
        for (const QualityReport& r : res.reports)
            if (r.max_qoi_err > res.tau_abs)
                throw std::logic_error("internal: quantity tolerance violated");
    } else {
        for (size_t i = 0; i < nf; ++i)
            res.reports[i].qoi_psnr =
                psnr(fields[i].values, final_dec[i].values);
    }
    return res;
}

DecompressResult decompress_archives(
    std::span<const std::vector<std::byte>> archives) {
    DecompressResult out;
    out.fields.resize(archives.size());
    out.headers.resize(archives.size());
    for (size_t i = 0; i < archives.size(); ++i)
        out.fields[i] = decode_archive(archives[i], &out.headers[i]);
    return out;
}

VerifyReport verify_archives(std::span<const Field> originals,
                             std::span<const std::vector<std::byte>> archives) {
    if (originals.empty() || originals.size() != archives.size())
        throw std::invalid_argument("need one archive per original field");
    DecompressResult dec = decompress_archives(archives);

    VerifyReport rep;
    rep.eps_user = dec.headers[0].eps_user;
    rep.tau_abs = dec.headers[0].tau_abs;
    rep.point_bound_ok = true;
    for (size_t i = 0; i < originals.size(); ++i) {
        double e = max_point_error({&originals[i], 1}, {&dec.fields[i], 1});
        rep.max_point_err = std::max(rep.max_point_err, e);
        if (e > dec.headers[i].eps_user) rep.point_bound_ok = false;
    }

    rep.qoi_ok = true;
    if (dec.headers[0].qoi) {
        const QoiSpec& spec = *dec.headers[0].qoi;
        if (spec.arity == 1) {
            for (size_t i = 0; i < originals.size(); ++i)
                rep.max_qoi_err = std::max(
                    rep.max_qoi_err, max_qoi_error(spec, {&originals[i], 1},
                                                   {&dec.fields[i], 1}));
        } else {
            if (originals.size() != spec.arity)
                throw std::invalid_argument(
                    "archive set does not cover the quantity's fields");
            rep.max_qoi_err = max_qoi_error(
                spec, originals, {dec.fields.data(), dec.fields.size()});
        }
        rep.qoi_ok = !(rep.max_qoi_err > rep.tau_abs);
    }
    return rep;
}

BaselineResult baseline_search(std::span<const Field> fields,
                               const QoiSpec& spec, double tau_abs,
                               double eps_hi, int max_probes) {
    if (!(eps_hi > 0.0) || !std::isfinite(eps_hi))
        throw std::invalid_argument("starting bound must be positive");
    if (!(tau_abs > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (fields.empty()) throw std::invalid_argument("no input fields");

    struct Probe {
        double err;
        uint64_t packed;
    };
    auto probe = [&](double eps) -> Probe {
        uint64_t packed = 0;
        std::vector<Field> dec(fields.size());
        for (size_t i = 0; i < fields.size(); ++i) {
            std::vector<double> bounds(fields[i].size(), eps);
            FieldStreams s = encode_streams(fields[i], bounds, eps);
            ArchiveHeader h;
            h.shape = fields[i].shape;
            h.dtype = fields[i].dtype;
            h.eps_user = eps;
            h.eps_global = eps;
            h.n_values = fields[i].size();
            auto bytes = assemble_archive(h, s);
            packed += bytes.size();
            dec[i] = decode_archive(bytes);
        }
        double err;
        if (spec.arity == 1) {
            err = 0.0;
            for (size_t i = 0; i < fields.size(); ++i)
                err = std::max(err, max_qoi_error(spec, {&fields[i], 1},
                                                  {&dec[i], 1}));
        } else {
            err = max_qoi_error(spec, fields, {dec.data(), dec.size()});
        }
        return {err, packed};
    };

    BaselineResult res;
    Probe p = probe(eps_hi);
    res.probes = 1;
    if (p.err <= tau_abs) {  // the point bound alone already satisfies tau
        res.eps = eps_hi;
        res.bracketed = true;
        res.packed_bytes = p.packed;
        res.max_qoi_err = p.err;
        return res;
    }

    // Log-scale bisection between a floor 30 octaves down and the failing
    // start; the unknown lower edge acts as the provisional good side until
    // a satisfying bound turns up.
    const double floor = std::ldexp(eps_hi, -30);
    double bad = eps_hi;
    double good = 0.0;
    Probe good_p{0.0, 0};
    while (res.probes < max_probes) {
        const double mid = std::sqrt((good > 0.0 ? good : floor) * bad);
        p = probe(mid);
        ++res.probes;
        if (p.err <= tau_abs) {
            good = mid;
            good_p = p;
            if (p.err >= 0.8 * tau_abs) break;  // inside the target band
        } else {
            bad = mid;
            if (bad <= floor * 1.000001) break;  // tau out of reach
        }
    }
    if (good == 0.0) {  // never met the tolerance; report the last probe
        res.eps = bad;
        res.packed_bytes = p.packed;
        res.max_qoi_err = p.err;
        return res;
    }
    res.eps = good;
    res.bracketed = true;
    res.packed_bytes = good_p.packed;
    res.max_qoi_err = good_p.err;
    return res;
}

}  // namespace qpkt
