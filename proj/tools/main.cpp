// qpkt command line tool: compress, decompress, verify, baseline, benchmark.

#include <cerrno>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "qpkt/codec.hpp"
#include "qpkt/ebtune.hpp"
#include "qpkt/field.hpp"
#include "qpkt/fixtures.hpp"
#include "qpkt/metrics.hpp"
#include "qpkt/pipeline.hpp"
#include "qpkt/qoi.hpp"
#include "qpkt/validate.hpp"

namespace {

using namespace qpkt;
namespace fs = std::filesystem;

struct Options {
    std::vector<std::string> inputs;
    std::vector<std::string> archives;  // verify only
    std::vector<std::string> outs;
    std::vector<size_t> shape;
    Dtype dtype = Dtype::F32;
    double eb_rel = 0.0, eb_abs = 0.0;
    double tol_rel = 0.0, tol_abs = 0.0;
    std::string qoi_text;
    QoiKind kind = QoiKind::Univariate;
    std::vector<size_t> block{4, 4, 4};
    std::vector<std::string> fields;
    double c = 2.0, beta = 0.999, c0 = 0.95;
    bool no_concentration = false;
    bool no_tune = false;
    std::string report_format = "table";
    std::string report_file;
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string shortnum(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += v[i];
    }
    return out;
}

std::string join_sizes(const std::vector<size_t>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

const char* dtype_name(Dtype d) { return d == Dtype::F32 ? "f32" : "f64"; }

std::vector<std::byte> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    in.seekg(0, std::ios::end);
    const auto n = static_cast<size_t>(in.tellg());
    in.seekg(0);
    std::vector<std::byte> buf(n);
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(n));
    if (!in) throw std::runtime_error("cannot read " + path);
    return buf;
}

void write_file_bytes(const std::string& path, std::span<const std::byte> b) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(b.data()),
              static_cast<std::streamsize>(b.size()));
    if (!out) throw std::runtime_error("cannot write " + path);
}

// Per-field labels: explicit --fields, else x/y/z/w for vector quantities
// (they double as the expression's variable names), else input file stems.
std::vector<std::string> make_labels(const Options& o, bool vector_kind) {
    const size_t n = o.inputs.size();
    if (!o.fields.empty()) {
        if (o.fields.size() != n)
            throw std::invalid_argument("--fields must name every input (got " +
                                        std::to_string(o.fields.size()) +
                                        " names for " + std::to_string(n) +
                                        " inputs)");
        return o.fields;
    }
    if (vector_kind) {
        static const std::vector<std::string> kDefault{"x", "y", "z", "w"};
        if (n > kDefault.size())
            throw std::invalid_argument(
                "more than four inputs: pass --fields to name the "
                "expression variables");
        return {kDefault.begin(),
                kDefault.begin() + static_cast<ptrdiff_t>(n)};
    }
    std::vector<std::string> out;
    out.reserve(n);
    for (const std::string& p : o.inputs)
        out.push_back(fs::path(p).stem().string());
    for (size_t i = 0; i < out.size(); ++i)
        for (size_t j = 0; j < i; ++j)
            if (out[j] == out[i]) {
                out[i] += "_" + std::to_string(i);
                break;
            }
    return out;
}

std::optional<QoiSpec> build_qoi(const Options& o,
                                 const std::vector<std::string>& labels,
                                 size_t rank, bool block_given) {
    if (o.qoi_text.empty()) return std::nullopt;
    switch (o.kind) {
        case QoiKind::Univariate:
            return make_univariate_qoi(o.qoi_text);
        case QoiKind::RegionalLinear: {
            std::vector<size_t> block = o.block;
            if (!block_given) block.assign(rank, 4);
            if (block.size() != rank)
                throw std::invalid_argument(
                    "--block must have one extent per --shape dimension");
            return make_regional_qoi(o.qoi_text, std::move(block));
        }
        case QoiKind::MultivariateGeneral:
            return make_multivariate_qoi(o.qoi_text, labels);
    }
    throw std::logic_error("unknown quantity kind");
}

std::string config_echo(const char* cmd, const Options& o,
                        const std::vector<std::string>& labels,
                        std::optional<unsigned> seed) {
    std::ostringstream s;
    s << "# config: cmd=" << cmd;
    if (!o.inputs.empty()) s << " inputs=" << join(o.inputs);
    if (!o.archives.empty()) s << " archives=" << join(o.archives);
    if (!o.shape.empty()) s << " shape=" << join_sizes(o.shape);
    s << " dtype=" << dtype_name(o.dtype);
    s << " eb-rel=" << (o.eb_rel > 0 ? num(o.eb_rel) : "-");
    s << " eb-abs=" << (o.eb_abs > 0 ? num(o.eb_abs) : "-");
    s << " qoi-tol-rel=" << (o.tol_rel > 0 ? num(o.tol_rel) : "-");
    s << " qoi-tol-abs=" << (o.tol_abs > 0 ? num(o.tol_abs) : "-");
    if (!o.qoi_text.empty()) {
        s << " qoi=\"" << o.qoi_text << "\"";
        s << " qoi-kind="
          << (o.kind == QoiKind::Univariate
                  ? "point"
                  : o.kind == QoiKind::RegionalLinear ? "region" : "vector");
        if (o.kind == QoiKind::RegionalLinear)
            s << " block=" << join_sizes(o.block);
    }
    if (!labels.empty()) s << " fields=" << join(labels);
    s << " c=" << num(o.no_concentration ? 0.0 : o.c) << " beta=" << num(o.beta)
      << " c0=" << num(o.c0);
    s << " tune=" << (o.no_tune ? "off" : "on");
    if (!o.outs.empty()) s << " out=" << join(o.outs);
    s << " report=" << o.report_format;
    if (seed) s << " seed=" << *seed;
    return s.str();
}

void emit_report(const Options& o, std::span<const QualityReport> rows,
                 const std::string& echo) {
    const std::string body =
        o.report_format == "csv" ? report_csv(rows) : report_table(rows);
    std::cout << echo << "\n" << body;
    if (!o.report_file.empty()) {
        std::ofstream f(o.report_file, std::ios::trunc);
        if (!f)
            throw std::runtime_error("cannot open " + o.report_file +
                                     " for writing");
        f << echo << "\n" << body;
    }
}

std::vector<std::string> derive_out_paths(
    const Options& o, const std::vector<std::string>& labels) {
    if (o.outs.size() == labels.size()) return o.outs;
    if (o.outs.size() == 1 && labels.size() > 1) {
        fs::path base(o.outs[0]);
        const std::string ext = base.extension().string();
        const std::string stem = (base.parent_path() / base.stem()).string();
        std::vector<std::string> out;
        out.reserve(labels.size());
        for (const std::string& l : labels) out.push_back(stem + "." + l + ext);
        return out;
    }
    throw std::invalid_argument(
        "pass one --out per input, or a single --out to use as a template");
}

CompressOptions to_compress_options(const Options& o,
                                    const std::vector<std::string>& labels,
                                    bool block_given) {
    CompressOptions co;
    co.eps_abs = o.eb_abs;
    co.eps_rel = o.eb_rel;
    co.tau_abs = o.tol_abs;
    co.tau_rel = o.tol_rel;
    co.qoi = build_qoi(o, labels, o.shape.size(), block_given);
    co.tune.c = o.no_concentration ? 0.0 : o.c;
    co.tune.beta = o.beta;
    co.tune.c0 = o.c0;
    co.tune_global = !o.no_tune;
    co.names = labels;
    return co;
}

std::vector<Field> load_inputs(const Options& o) {
    if (o.shape.empty()) throw std::invalid_argument("--shape is required");
    std::vector<Field> fields;
    fields.reserve(o.inputs.size());
    for (const std::string& p : o.inputs)
        fields.push_back(read_raw(p, o.shape, o.dtype));
    return fields;
}

// Relative drift against the finite range of the exact outputs.
double rel_against_range(double abs_err, std::span<const double> exact) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : exact)
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    const double w = hi - lo;
    if (w > 0.0 && std::isfinite(w)) return abs_err / w;
    return abs_err > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

int run_compress(const Options& o, bool block_given) {
    auto fields = load_inputs(o);
    const bool vec =
        o.kind == QoiKind::MultivariateGeneral && !o.qoi_text.empty();
    const auto labels = make_labels(o, vec);
    const CompressOptions co = to_compress_options(o, labels, block_given);
    const CompressResult res = compress_fields(fields, co);

    const auto outs = derive_out_paths(o, labels);
    for (size_t i = 0; i < outs.size(); ++i)
        write_file_bytes(outs[i], res.archives[i]);

    emit_report(o, res.reports, config_echo("compress", o, labels, {}));
    std::printf(
        "wrote %zu archive(s): %" PRIu64 " -> %" PRIu64
        " bytes (ratio %.3f), outliers %" PRIu64 ", corrections %" PRIu64 "\n",
        outs.size(), res.raw_bytes, res.packed_bytes,
        compression_ratio(res.raw_bytes, res.packed_bytes), res.n_outliers,
        res.n_corrections);
    return 0;
}

int run_decompress(const Options& o) {
    if (o.inputs.size() != o.outs.size())
        throw std::invalid_argument("pass one --out per --input archive");
    std::cout << "# config: cmd=decompress inputs=" << join(o.inputs)
              << " out=" << join(o.outs) << "\n";
    for (size_t i = 0; i < o.inputs.size(); ++i) {
        const auto bytes = read_file_bytes(o.inputs[i]);
        ArchiveHeader hdr;
        const Field f = decode_archive(bytes, &hdr);
        write_raw(f, o.outs[i]);
        std::string qoi = hdr.qoi ? " qoi=\"" + hdr.qoi->text + "\"" : "";
        std::printf("%s: %s %s eps=%s tau=%s%s -> %s (%zu bytes)\n",
                    o.inputs[i].c_str(), join_sizes(hdr.shape).c_str(),
                    dtype_name(hdr.dtype), shortnum(hdr.eps_user).c_str(),
                    shortnum(hdr.tau_abs).c_str(), qoi.c_str(),
                    o.outs[i].c_str(), f.byte_size());
    }
    return 0;
}

int run_verify(const Options& o) {
    if (o.inputs.empty() || o.inputs.size() != o.archives.size())
        throw std::invalid_argument(
            "pass matching --input (original) and --archive pairs");
    std::vector<std::vector<std::byte>> bytes;
    bytes.reserve(o.archives.size());
    for (const std::string& p : o.archives) bytes.push_back(read_file_bytes(p));

    std::vector<Field> orig;
    orig.reserve(o.inputs.size());
    for (size_t i = 0; i < o.inputs.size(); ++i) {
        const ArchiveHeader hdr = peek_header(bytes[i]);
        orig.push_back(read_raw(o.inputs[i], hdr.shape, hdr.dtype));
    }

    const VerifyReport rep = verify_archives(orig, bytes);
    const DecompressResult dec = decompress_archives(bytes);

    std::vector<QualityReport> rows(orig.size());
    for (size_t i = 0; i < orig.size(); ++i) {
        QualityReport& r = rows[i];
        const ArchiveHeader& h = dec.headers[i];
        r.name = fs::path(o.inputs[i]).stem().string();
        r.n_values = orig[i].size();
        r.raw_bytes = orig[i].byte_size();
        r.packed_bytes = bytes[i].size();
        r.eps_user = h.eps_user;
        r.eps_global = h.eps_global;
        r.tau_abs = h.tau_abs;
        r.max_point_err =
            max_point_error({&orig[i], 1}, {&dec.fields[i], 1});
        r.n_outliers = h.n_outliers;
        r.n_corrections = h.n_corrections;
    }
    if (dec.headers[0].qoi) {
        const QoiSpec& spec = *dec.headers[0].qoi;
        if (spec.arity == 1) {
            for (size_t i = 0; i < orig.size(); ++i) {
                const Field qx = evaluate_qoi(spec, {&orig[i], 1}, true);
                const Field qd = evaluate_qoi(spec, {&dec.fields[i], 1}, true);
                rows[i].max_qoi_err =
                    max_qoi_error(spec, {&orig[i], 1}, {&dec.fields[i], 1});
                rows[i].max_qoi_rel_err =
                    rel_against_range(rows[i].max_qoi_err, qx.values);
                rows[i].qoi_psnr = psnr(qx.values, qd.values);
            }
        } else {
            const Field qx = evaluate_qoi(spec, orig, true);
            const Field qd =
                evaluate_qoi(spec, {dec.fields.data(), dec.fields.size()}, true);
            const double err = max_qoi_error(
                spec, orig, {dec.fields.data(), dec.fields.size()});
            for (QualityReport& r : rows) {
                r.max_qoi_err = err;
                r.max_qoi_rel_err = rel_against_range(err, qx.values);
                r.qoi_psnr = psnr(qx.values, qd.values);
            }
        }
    } else {
        for (size_t i = 0; i < orig.size(); ++i)
            rows[i].qoi_psnr = psnr(orig[i].values, dec.fields[i].values);
    }

    emit_report(o, rows,
                "# config: cmd=verify inputs=" + join(o.inputs) +
                    " archives=" + join(o.archives) +
                    " report=" + o.report_format);
    std::printf("point bound:    max err %s vs eps %s  %s\n",
                shortnum(rep.max_point_err).c_str(),
                shortnum(rep.eps_user).c_str(),
                rep.point_bound_ok ? "PASS" : "FAIL");
    if (dec.headers[0].qoi)
        std::printf("quantity drift: max err %s vs tau %s  %s\n",
                    shortnum(rep.max_qoi_err).c_str(),
                    shortnum(rep.tau_abs).c_str(),
                    rep.qoi_ok ? "PASS" : "FAIL");
    std::printf("VERIFY: %s\n", rep.ok() ? "PASS" : "FAIL");
    return rep.ok() ? 0 : 1;
}

int run_baseline(const Options& o, bool block_given) {
    auto fields = load_inputs(o);
    const bool vec =
        o.kind == QoiKind::MultivariateGeneral && !o.qoi_text.empty();
    const auto labels = make_labels(o, vec);
    const CompressOptions co = to_compress_options(o, labels, block_given);
    if (!co.qoi)
        throw std::invalid_argument("baseline needs --qoi and a tolerance");
    const double eps_hi = resolve_point_bound(fields, co);
    const double tau = resolve_qoi_tolerance(fields, co);
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw std::invalid_argument(
            "baseline needs a finite quantity tolerance "
            "(--qoi-tol-rel or --qoi-tol-abs)");

    const BaselineResult r = baseline_search(fields, *co.qoi, tau, eps_hi);
    uint64_t raw = 0;
    for (const Field& f : fields) raw += f.byte_size();

    std::cout << config_echo("baseline", o, labels, {}) << "\n";
    std::printf("probes:              %d\n", r.probes);
    std::printf("uniform bound:       %s (started from %s)\n",
                shortnum(r.eps).c_str(), shortnum(eps_hi).c_str());
    std::printf("max quantity drift:  %s (tau %s)\n",
                shortnum(r.max_qoi_err).c_str(), shortnum(tau).c_str());
    std::printf("packed bytes:        %" PRIu64 " (ratio %.3f)\n",
                r.packed_bytes, compression_ratio(raw, r.packed_bytes));
    std::printf("bracketed:           %s\n", r.bracketed ? "yes" : "no");
    return 0;
}

int run_benchmark(const Options& o, bool block_given) {
    unsigned seed = 1;
    if (const char* s = std::getenv("QPKT_SEED"); s && *s) {
        char* end = nullptr;
        errno = 0;
        const unsigned long v = std::strtoul(s, &end, 10);
        if (errno != 0 || end == s || *end != '\0')
            throw std::invalid_argument(
                "QPKT_SEED must be a non-negative integer");
        seed = static_cast<unsigned>(v);
    }

    const bool vec =
        o.kind == QoiKind::MultivariateGeneral && !o.qoi_text.empty();
    std::vector<std::string> labels{"x"};
    if (vec)
        labels = o.fields.empty() ? std::vector<std::string>{"x", "y", "z"}
                                  : o.fields;
    const size_t arity = vec ? labels.size() : 1;

    using Gen = Field (*)(std::vector<size_t>, unsigned);
    const std::pair<const char*, Gen> gens[] = {
        {"sinusoid",
         [](std::vector<size_t> sh, unsigned s) {
             return sinusoid_field(std::move(sh), s);
         }},
        {"lognormal",
         [](std::vector<size_t> sh, unsigned s) {
             return lognormal_field(std::move(sh), s);
         }},
        {"plateau",
         [](std::vector<size_t> sh, unsigned s) {
             return plateau_field(std::move(sh), s);
         }},
    };

    std::vector<QualityReport> rows;
    for (const auto& [name, gen] : gens) {
        std::vector<Field> fields;
        fields.reserve(arity);
        for (size_t k = 0; k < arity; ++k)
            fields.push_back(with_dtype(
                gen(o.shape, seed + 17u * static_cast<unsigned>(k)), o.dtype));

        CompressOptions co = to_compress_options(o, labels, block_given);
        co.names.clear();
        for (size_t k = 0; k < arity; ++k)
            co.names.push_back(arity == 1 ? std::string(name)
                                          : std::string(name) + "/" + labels[k]);
        const CompressResult res = compress_fields(fields, co);
        rows.insert(rows.end(), res.reports.begin(), res.reports.end());
    }
    emit_report(o, rows, config_echo("benchmark", o, labels, seed));
    return 0;
}

void add_dtype_flag(CLI::App* sub, Options& o) {
    static const std::map<std::string, Dtype> kDtypes{{"f32", Dtype::F32},
                                                      {"f64", Dtype::F64}};
    sub->add_option("--dtype", o.dtype,
                    "stored element width (default f32)")
        ->transform(CLI::CheckedTransformer(kDtypes, CLI::ignore_case));
}

CLI::Option* add_kind_flag(CLI::App* sub, Options& o) {
    static const std::map<std::string, QoiKind> kKinds{
        {"point", QoiKind::Univariate},
        {"region", QoiKind::RegionalLinear},
        {"vector", QoiKind::MultivariateGeneral}};
    return sub
        ->add_option("--qoi-kind", o.kind,
                     "how the quantity reads the data (default point)")
        ->transform(CLI::CheckedTransformer(kKinds, CLI::ignore_case));
}

void add_tune_flags(CLI::App* sub, Options& o) {
    sub->add_option("--c", o.c, "concentration scale factor")
        ->capture_default_str();
    sub->add_option("--beta", o.beta, "per-region confidence target")
        ->capture_default_str();
    sub->add_option("--c0", o.c0, "slope floor for the global-bound walk")
        ->capture_default_str();
    sub->add_flag("--no-concentration", o.no_concentration,
                  "worst-case tolerance splits only (same as --c 0)");
    sub->add_flag("--no-tune", o.no_tune,
                  "skip the sample-driven global-bound search");
}

void add_report_flags(CLI::App* sub, Options& o) {
    sub->add_option("--report", o.report_format, "report format")
        ->check(CLI::IsMember({"table", "csv"}))
        ->capture_default_str();
    sub->add_option("--report-file", o.report_file,
                    "also write the report to this file");
}

CLI::Option* add_benchmark_flags(CLI::App* sub, Options& o) {
    sub->add_option("--shape", o.shape, "fixture extents")
        ->delimiter(',')
        ->capture_default_str();
    add_dtype_flag(sub, o);
    auto* bound = sub->add_option_group("point bound (at most one)");
    bound->add_option("--eb-rel", o.eb_rel,
                      "point bound relative to the value range")
        ->capture_default_str();
    bound->add_option("--eb-abs", o.eb_abs, "absolute point bound");
    bound->require_option(0, 1);
    sub->add_option("--qoi", o.qoi_text, "preserved quantity")
        ->capture_default_str();
    add_kind_flag(sub, o);
    auto* tol = sub->add_option_group("quantity tolerance (at most one)");
    tol->add_option("--qoi-tol-rel", o.tol_rel,
                    "tolerance relative to the quantity's output range")
        ->capture_default_str();
    tol->add_option("--qoi-tol-abs", o.tol_abs,
                    "absolute quantity tolerance (inf allowed)");
    tol->require_option(0, 1);
    CLI::Option* block =
        sub->add_option("--block", o.block,
                        "region tile extents for --qoi-kind region")
            ->delimiter(',');
    sub->add_option("--fields", o.fields,
                    "variable names for vector quantities (default x,y,z)")
        ->delimiter(',');
    add_tune_flags(sub, o);
    add_report_flags(sub, o);
    return block;
}

// Shared flag registration for subcommands that run the compressor.
CLI::Option* add_job_flags(CLI::App* sub, Options& o, bool with_outputs) {
    sub->add_option("--input", o.inputs, "input raw file(s), row-major")
        ->required()
        ->delimiter(',');
    sub->add_option("--shape", o.shape, "grid extents, e.g. 64,64,64")
        ->required()
        ->delimiter(',');
    add_dtype_flag(sub, o);

    auto* bound = sub->add_option_group("point bound (exactly one)");
    bound->add_option("--eb-rel", o.eb_rel,
                      "point bound relative to the value range");
    bound->add_option("--eb-abs", o.eb_abs, "absolute point bound");
    bound->require_option(1);

    auto* qoi = sub->add_option(
        "--qoi", o.qoi_text, "preserved quantity, e.g. \"x^2\" or \"x*y*z\"");
    add_kind_flag(sub, o)->needs(qoi);

    auto* tol = sub->add_option_group("quantity tolerance (at most one)");
    tol->add_option("--qoi-tol-rel", o.tol_rel,
                    "tolerance relative to the quantity's output range")
        ->needs(qoi);
    tol->add_option("--qoi-tol-abs", o.tol_abs,
                    "absolute quantity tolerance (inf allowed)")
        ->needs(qoi);
    tol->require_option(0, 1);

    CLI::Option* block =
        sub->add_option("--block", o.block,
                        "region tile extents for --qoi-kind region")
            ->delimiter(',');
    sub->add_option("--fields", o.fields,
                    "field labels; vector quantities use them as variable "
                    "names (default x,y,z,w)")
        ->delimiter(',');
    add_tune_flags(sub, o);
    if (with_outputs)
        sub->add_option("--out", o.outs, "output archive path(s)")
            ->required()
            ->delimiter(',');
    add_report_flags(sub, o);
    return block;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantity-preserving error-bounded lossy compressor"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "qpkt 1.0.0");

    Options oc, od, ov, ob, om;
    om.eb_rel = 1e-2;
    om.tol_rel = 1e-3;
    om.qoi_text = "x^2";
    om.shape = {64, 64, 64};

    CLI::App* compress = app.add_subcommand(
        "compress", "compress raw field(s) under point and quantity bounds");
    CLI::Option* c_block = add_job_flags(compress, oc, true);

    CLI::App* decompress =
        app.add_subcommand("decompress", "decode archive(s) back to raw files");
    decompress->add_option("--input", od.inputs, "archive file(s)")
        ->required()
        ->delimiter(',');
    decompress->add_option("--out", od.outs, "output raw path(s)")
        ->required()
        ->delimiter(',');

    CLI::App* verify = app.add_subcommand(
        "verify", "decode and check archives against the originals");
    verify->add_option("--input", ov.inputs, "original raw file(s)")
        ->required()
        ->delimiter(',');
    verify->add_option("--archive", ov.archives, "archive file(s)")
        ->required()
        ->delimiter(',');
    add_report_flags(verify, ov);

    CLI::App* baseline = app.add_subcommand(
        "baseline",
        "uniform-bound bisection reference: probe until the quantity drift "
        "lands in [0.8 tau, tau]");
    CLI::Option* b_block = add_job_flags(baseline, ob, false);

    CLI::App* benchmark = app.add_subcommand(
        "benchmark", "compress built-in synthetic fields (seed: QPKT_SEED)");
    CLI::Option* m_block = add_benchmark_flags(benchmark, om);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(compress))
            return run_compress(oc, c_block->count() > 0);
        if (app.got_subcommand(decompress)) return run_decompress(od);
        if (app.got_subcommand(verify)) return run_verify(ov);
        if (app.got_subcommand(baseline))
            return run_baseline(ob, b_block->count() > 0);
        if (app.got_subcommand(benchmark))
            return run_benchmark(om, m_block->count() > 0);
    } catch (const std::exception& e) {
        std::cerr << "qpkt: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
