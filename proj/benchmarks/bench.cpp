// Microbenchmarks for the hot paths: expression evaluation, per-point bound
// derivation, plan construction, and the codec round trip.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "qpkt/codec.hpp"
#include "qpkt/ebtune.hpp"
#include "qpkt/expr.hpp"
#include "qpkt/field.hpp"
#include "qpkt/fixtures.hpp"
#include "qpkt/pipeline.hpp"
#include "qpkt/qoi.hpp"

namespace {

using namespace qpkt;

Field cube_fixture(size_t edge) {
    return with_dtype(sinusoid_field({edge, edge, edge}, 1), Dtype::F32);
}

void BM_expr_eval(benchmark::State& state) {
    const QoiSpec spec = make_univariate_qoi("sqrt(x^2 + 1) * exp(-x / 4)");
    const Field f = cube_fixture(32);
    for (auto _ : state) {
        double acc = 0.0;
        for (double v : f.values) acc += spec.bundle.cf({&v, 1});
        benchmark::DoNotOptimize(acc);
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(f.size()));
}
BENCHMARK(BM_expr_eval);

void BM_point_bounds(benchmark::State& state) {
    const QoiSpec spec = make_univariate_qoi("x^2");
    const Field f = cube_fixture(32);
    for (auto _ : state) {
        double acc = 0.0;
        for (double v : f.values)
            acc += univariate_bound(v, spec.bundle, 1e-3, 1e-2);
        benchmark::DoNotOptimize(acc);
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(f.size()));
}
BENCHMARK(BM_point_bounds);

void BM_build_plan_regional(benchmark::State& state) {
    const QoiSpec spec = make_regional_qoi("x^2", {4, 4, 4});
    const std::vector<Field> fields{cube_fixture(32)};
    for (auto _ : state) {
        BoundPlan plan = build_plan(fields, spec, 1e-3, 1e-2, TuneParams{});
        benchmark::DoNotOptimize(plan.bounds[0].data());
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(fields[0].size()));
}
BENCHMARK(BM_build_plan_regional);

void BM_encode(benchmark::State& state) {
    const Field f = cube_fixture(static_cast<size_t>(state.range(0)));
    const std::vector<double> bounds(f.size(), 1e-3);
    for (auto _ : state) {
        FieldStreams s = encode_streams(f, bounds, 1e-3);
        benchmark::DoNotOptimize(s.byte_size());
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(f.byte_size()));
}
BENCHMARK(BM_encode)->Arg(32)->Arg(64);

void BM_decode(benchmark::State& state) {
    const Field f = cube_fixture(static_cast<size_t>(state.range(0)));
    const std::vector<double> bounds(f.size(), 1e-3);
    FieldStreams s = encode_streams(f, bounds, 1e-3);
    ArchiveHeader h;
    h.shape = f.shape;
    h.dtype = f.dtype;
    h.eps_user = 1e-3;
    h.eps_global = 1e-3;
    h.n_values = f.size();
    const std::vector<std::byte> archive = assemble_archive(h, s);
    for (auto _ : state) {
        Field dec = decode_archive(archive);
        benchmark::DoNotOptimize(dec.values.data());
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(f.byte_size()));
}
BENCHMARK(BM_decode)->Arg(32)->Arg(64);

void BM_compress_pipeline(benchmark::State& state) {
    const std::vector<Field> fields{
        cube_fixture(static_cast<size_t>(state.range(0)))};
    CompressOptions co;
    co.eps_rel = 1e-2;
    co.tau_rel = 1e-3;
    co.qoi = make_univariate_qoi("x^2");
    for (auto _ : state) {
        CompressResult res = compress_fields(fields, co);
        benchmark::DoNotOptimize(res.packed_bytes);
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(fields[0].byte_size()));
}
BENCHMARK(BM_compress_pipeline)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
