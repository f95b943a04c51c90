#include <benchmark/benchmark.h>

#include <vector>

#include "rvp/codec.hpp"
#include "rvp/ecg_io.hpp"
#include "rvp/metrics.hpp"
#include "rvp/mt.hpp"
#include "rvp/rng.hpp"
#include "rvp/varpro.hpp"

namespace {

// A representative corrected, unit-norm beat of the given length.
Eigen::VectorXcd analytic_test_signal(std::size_t m) {
  rvp::Rng rng(42);
  std::vector<double> beat = rvp::synth_beat(m, {}, rng);
  double f0 = 0.0, flast = 0.0, norm = 0.0;
  rvp::linear_correct(beat, &f0, &flast);
  rvp::normalize(beat, &norm);
  return rvp::analytic_extend(beat);
}

std::vector<rvp::DiscPoint> test_poles() {
  return {{0.5, 0.0}, {0.0, 0.3}};
}

void BM_BuildMTMatrix(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto pv = rvp::PoleVector::expanded(test_poles(), {2, 4});
  for (auto _ : state) {
    benchmark::DoNotOptimize(rvp::build_mt_matrix(pv, m));
  }
}
BENCHMARK(BM_BuildMTMatrix)->Arg(300)->Arg(1024);

void BM_Project(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto pv = rvp::PoleVector::expanded(test_poles(), {2, 4});
  const auto basis = rvp::build_mt_matrix(pv, m);
  const Eigen::VectorXcd signal = analytic_test_signal(m);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rvp::project(basis, signal));
  }
}
BENCHMARK(BM_Project)->Arg(300)->Arg(1024);

void BM_QuantizedCost(benchmark::State& state) {
  const Eigen::VectorXcd signal = analytic_test_signal(300);
  const auto poles = test_poles();
  for (auto _ : state) {
    benchmark::DoNotOptimize(rvp::generalized_cost(poles, 10, signal, 0.5, true));
  }
}
BENCHMARK(BM_QuantizedCost);

void BM_AnalyticExtend(benchmark::State& state) {
  rvp::Rng rng(7);
  std::vector<double> beat = rvp::synth_beat(static_cast<std::size_t>(state.range(0)), {}, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rvp::analytic_extend(beat));
  }
}
BENCHMARK(BM_AnalyticExtend)->Arg(300)->Arg(1024);

void BM_WaveletDecompose(benchmark::State& state) {
  rvp::Rng rng(7);
  std::vector<double> signal = rvp::synth_beat(static_cast<std::size_t>(state.range(0)), {}, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rvp::wavelet_decompose_5(signal));
  }
}
BENCHMARK(BM_WaveletDecompose)->Arg(1024)->Arg(65536);

void BM_DetectQrs(benchmark::State& state) {
  rvp::Rng rng(3);
  rvp::Record record = rvp::synth_record(64, 300, {}, 0.05, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rvp::detect_qrs(record));
  }
}
BENCHMARK(BM_DetectQrs);

void BM_EncodeBeat(benchmark::State& state) {
  rvp::Rng rng(5);
  std::vector<double> samples = rvp::synth_beat(300, {}, rng);
  rvp::BeatSegment seg;
  seg.samples = samples;
  rvp::linear_correct(seg.samples, &seg.f0, &seg.f_last);
  seg.flat = !rvp::normalize(seg.samples, &seg.norm);
  // normalize leaves the data scaled; encode_beat expects the corrected
  // (unnormalized) samples, so rebuild them at the recorded norm.
  for (auto& v : seg.samples) v *= seg.norm;

  rvp::BeatEncodeParams params;
  params.iterations = static_cast<int>(state.range(0));
  const rvp::QuantRanges ranges{-1.0, 1.0, 2.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(rvp::encode_beat(seg, params, ranges, {}));
  }
}
BENCHMARK(BM_EncodeBeat)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_SerializeParse(benchmark::State& state) {
  rvp::CompressedRecord record;
  record.beat_count = 100;
  record.amp_min = -1.0f;
  record.amp_max = 1.0f;
  record.norm_max = 2.0f;
  rvp::Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    rvp::CompressedBeat beat;
    beat.dim_index = 10;
    const auto& row = rvp::architecture_lookup(beat.dim_index);
    beat.length = 300;
    for (int k = 0; k < row.n; ++k)
      beat.pole_codes.push_back({static_cast<std::uint32_t>(rng.uniform_int(0, 15)),
                                 static_cast<std::uint32_t>(rng.uniform_int(0, 15))});
    for (int k = 0; k < row.total_N; ++k)
      beat.coeff_codes.push_back({static_cast<std::uint32_t>(rng.uniform_int(0, 127)),
                                  static_cast<std::uint32_t>(rng.uniform_int(0, 127))});
    record.beats.push_back(beat);
  }
  for (auto _ : state) {
    auto bytes = rvp::serialize(record);
    benchmark::DoNotOptimize(rvp::parse(bytes));
  }
}
BENCHMARK(BM_SerializeParse);

}  // namespace

BENCHMARK_MAIN();
