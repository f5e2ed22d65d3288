#include <cmath>

#include "doctest.h"
#include "qpkt/fixtures.hpp"
#include "qpkt/pipeline.hpp"
#include "qpkt/validate.hpp"

using namespace qpkt;

TEST_CASE("synthetic fields are deterministic and strictly positive") {
    Field a = sinusoid_field({16, 16, 16}, 5);
    Field b = sinusoid_field({16, 16, 16}, 5);
    CHECK(a.values == b.values);
    CHECK(sinusoid_field({16, 16, 16}, 6).values != a.values);
    for (double v : a.values) {
        CHECK(v >= 1.29);
        CHECK(v <= 3.71);
    }

    Field ln1 = lognormal_field({20, 20}, 3);
    CHECK(ln1.values == lognormal_field({20, 20}, 3).values);
    for (double v : ln1.values) CHECK(v > 0.0);
    // smoothing tames point-to-point jumps
    Field raw = lognormal_field({4000}, 9);
    double rough_raw = 0.0;
    for (size_t i = 1; i < raw.values.size(); ++i)
        rough_raw += std::fabs(raw.values[i] - raw.values[i - 1]);
    CHECK(rough_raw / raw.values.size() < 1.5);

    Field pl = plateau_field({24, 24}, 7, 8);
    CHECK(pl.values == plateau_field({24, 24}, 7, 8).values);
    for (size_t y = 0; y < 8; ++y)
        for (size_t x = 0; x < 8; ++x)
            CHECK(pl.values[y * 24 + x] == pl.values[0]);  // first tile
    for (double v : pl.values) {
        CHECK(v >= 0.5);
        CHECK(v <= 10.0);
    }

    Field f32 = with_dtype(sinusoid_field({50}, 1), Dtype::F32);
    CHECK(f32.dtype == Dtype::F32);
    for (double v : f32.values)
        CHECK(v == static_cast<double>(static_cast<float>(v)));
}

TEST_CASE("plain error-bounded round trip") {
    Field x = sinusoid_field({24, 24, 24}, 11);
    CompressOptions opt;
    opt.eps_abs = 1e-3;
    auto res = compress_fields({&x, 1}, opt);
    REQUIRE(res.archives.size() == 1);
    CHECK(res.eps_abs == 1e-3);
    CHECK(std::isinf(res.tau_abs));

    auto dec = decompress_archives(res.archives);
    CHECK(dec.fields[0].shape == x.shape);
    CHECK(max_point_error({&x, 1}, {dec.fields.data(), 1}) <= 1e-3);

    const QualityReport& r = res.reports[0];
    CHECK(r.max_point_err <= 1e-3);
    CHECK(r.packed_bytes == res.archives[0].size());
    CHECK(r.raw_bytes == x.byte_size());
    CHECK(r.packed_bytes < r.raw_bytes);  // actually compresses
    CHECK(r.qoi_psnr > 60.0);             // data fidelity without a quantity

    auto v = verify_archives({&x, 1}, res.archives);
    CHECK(v.ok());
    CHECK(v.max_point_err <= v.eps_user);
}

TEST_CASE("relative bounds resolve against the value range") {
    Field x = sinusoid_field({4000}, 2);
    auto [lo, hi] = x.value_range();
    CompressOptions opt;
    opt.eps_rel = 1e-3;
    auto res = compress_fields({&x, 1}, opt);
    CHECK(res.eps_abs == doctest::Approx(1e-3 * (hi - lo)).epsilon(1e-12));

    CompressOptions none;
    CHECK_THROWS_AS(compress_fields({&x, 1}, none), std::invalid_argument);
}

TEST_CASE("quantity-preserving compression holds both bounds") {
    Field x = lognormal_field({24, 24, 24}, 4);
    CompressOptions opt;
    opt.eps_rel = 1e-2;
    opt.tau_rel = 1e-3;
    opt.qoi = make_univariate_qoi("x^2");
    auto res = compress_fields({&x, 1}, opt);

    Field qx = evaluate_qoi(*opt.qoi, {&x, 1});
    auto [qlo, qhi] = qx.value_range();
    CHECK(res.tau_abs == doctest::Approx(1e-3 * (qhi - qlo)).epsilon(1e-12));

    auto dec = decompress_archives(res.archives);
    CHECK(max_point_error({&x, 1}, {dec.fields.data(), 1}) <= res.eps_abs);
    CHECK(max_qoi_error(*opt.qoi, {&x, 1}, {dec.fields.data(), 1}) <=
          res.tau_abs);

    const QualityReport& r = res.reports[0];
    CHECK(r.max_qoi_err <= res.tau_abs);
    CHECK(r.max_qoi_rel_err <= 1e-3 * (1.0 + 1e-9));
    CHECK(r.n_corrections == res.n_corrections);
    CHECK(r.qoi_psnr > 40.0);

    REQUIRE(dec.headers[0].qoi.has_value());
    CHECK(dec.headers[0].qoi->text == "x^2");
    CHECK(dec.headers[0].tau_abs == res.tau_abs);

    auto v = verify_archives({&x, 1}, res.archives);
    CHECK(v.ok());
}

TEST_CASE("regional quantities validate against decoded block sums") {
    Field x = lognormal_field({32, 32}, 8);
    CompressOptions opt;
    opt.eps_rel = 5e-2;
    opt.tau_abs = 1e-2;
    opt.qoi = make_regional_qoi("x", {8, 8}, CoeffRule::Average);
    auto res = compress_fields({&x, 1}, opt);
    auto dec = decompress_archives(res.archives);
    CHECK(max_qoi_error(*opt.qoi, {&x, 1}, {dec.fields.data(), 1}) <= 1e-2);
    CHECK(verify_archives({&x, 1}, res.archives).ok());
}

TEST_CASE("vector quantities bind several fields at once") {
    std::vector<Field> xyz{sinusoid_field({16, 16, 16}, 21),
                           sinusoid_field({16, 16, 16}, 22),
                           sinusoid_field({16, 16, 16}, 23)};
    CompressOptions opt;
    opt.eps_abs = 5e-3;
    opt.tau_abs = 1e-3;
    opt.qoi = make_multivariate_qoi("x^2 + y^2 + z^2", {"x", "y", "z"});
    opt.names = {"vx", "vy", "vz"};
    auto res = compress_fields(xyz, opt);
    REQUIRE(res.archives.size() == 3);
    CHECK(res.reports[1].name == "vy");

    auto dec = decompress_archives(res.archives);
    CHECK(max_qoi_error(*opt.qoi, xyz,
                        {dec.fields.data(), dec.fields.size()}) <= 1e-3);
    CHECK(verify_archives(xyz, res.archives).ok());

    std::vector<Field> two{xyz[0], xyz[1]};
    CHECK_THROWS_AS(compress_fields(two, opt), std::invalid_argument);
}

TEST_CASE("verification reports a broken promise") {
    Field x = sinusoid_field({2000}, 31);
    CompressOptions opt;
    opt.eps_abs = 1e-3;
    auto res = compress_fields({&x, 1}, opt);

    Field other = sinusoid_field({2000}, 32);  // not what was compressed
    auto v = verify_archives({&other, 1}, res.archives);
    CHECK(!v.point_bound_ok);
    CHECK(!v.ok());

    auto corrupt = res.archives;
    corrupt[0][corrupt[0].size() - 10] ^= std::byte{0x1};
    CHECK_THROWS_AS(verify_archives({&x, 1}, corrupt), CodecError);
}

TEST_CASE("repeated runs produce byte-identical archives") {
    Field x = lognormal_field({20, 20, 20}, 17);
    CompressOptions opt;
    opt.eps_rel = 1e-2;
    opt.tau_rel = 1e-3;
    opt.qoi = make_univariate_qoi("ln(x)");
    auto a = compress_fields({&x, 1}, opt);
    auto b = compress_fields({&x, 1}, opt);
    CHECK(a.archives == b.archives);
}

TEST_CASE("the global-bound search can be turned off") {
    Field x = lognormal_field({24, 24, 24}, 13);
    CompressOptions opt;
    opt.eps_rel = 1e-2;
    opt.tau_rel = 1e-3;
    opt.qoi = make_univariate_qoi("x^3");
    opt.tune_global = false;
    auto res = compress_fields({&x, 1}, opt);
    CHECK(!res.tuning.tuned);
    CHECK(res.reports[0].eps_global == res.eps_abs);

    opt.tune_global = true;
    auto tuned = compress_fields({&x, 1}, opt);
    CHECK(tuned.reports[0].eps_global <= res.eps_abs);
    // both honor the same promises regardless of tuning
    auto va = verify_archives({&x, 1}, res.archives);
    auto vb = verify_archives({&x, 1}, tuned.archives);
    CHECK(va.ok());
    CHECK(vb.ok());
}

TEST_CASE("reference search lands inside the tolerance") {
    Field x = lognormal_field({24, 24, 24}, 29);
    QoiSpec q = make_univariate_qoi("x^2");
    Field qx = evaluate_qoi(q, {&x, 1});
    auto [lo, hi] = qx.value_range();
    const double tau = 1e-3 * (hi - lo);
    const double eps_hi = 1e-2 * x.range_width();

    auto base = baseline_search({&x, 1}, q, tau, eps_hi);
    CHECK(base.bracketed);
    CHECK(base.max_qoi_err <= tau);
    CHECK(base.probes >= 2);  // the starting bound was not good enough
    CHECK(base.probes <= 20);
    CHECK(base.eps < eps_hi);
    CHECK(base.packed_bytes > 0);

    CHECK_THROWS_AS(baseline_search({&x, 1}, q, 0.0, eps_hi),
                    std::invalid_argument);
    CHECK_THROWS_AS(baseline_search({&x, 1}, q, tau, 0.0),
                    std::invalid_argument);
}

TEST_CASE("constant input rejects relative bounds but takes absolute ones") {
    Field x;
    x.shape = {512};
    x.dtype = Dtype::F64;
    x.values.assign(512, 7.5);

    CompressOptions rel;
    rel.eps_rel = 1e-3;  // nothing to normalize by
    CHECK_THROWS_AS(compress_fields({&x, 1}, rel), std::invalid_argument);

    CompressOptions rel_tau;
    rel_tau.eps_abs = 1e-3;
    rel_tau.qoi = make_univariate_qoi("x^2");
    rel_tau.tau_rel = 1e-3;  // quantity output is constant too
    CHECK_THROWS_AS(compress_fields({&x, 1}, rel_tau), std::invalid_argument);

    CompressOptions abs;
    abs.eps_abs = 1e-3;
    abs.qoi = make_univariate_qoi("x^2");
    abs.tau_abs = 1e-2;
    auto res = compress_fields({&x, 1}, abs);
    CHECK(verify_archives({&x, 1}, res.archives).ok());
    CHECK(res.archives[0].size() < 700);
}
