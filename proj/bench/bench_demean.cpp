#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "airfare/demean.hpp"
#include "airfare/features.hpp"
#include "airfare/synthgen.hpp"

namespace {

struct BenchData {
    Eigen::MatrixXd columns;
    airfare::FEGroups groups;
};

BenchData make_data(long rows) {
    airfare::DGPSpec dgp;
    dgp.coefficients = {{"adv_days", -0.3}, {"nstop", -20.0}, {"usd", 30.0},
                        {"hday_dept_eve", 10.0}, {"conn_pax", 0.001}};
    dgp.rows = rows;
    dgp.seed = 77;
    dgp.n_airlines = 6;
    dgp.n_destinations = 20;
    dgp.n_quote_months = 10;
    dgp.n_depart_months = 13;
    dgp.decoys_per_hundred = 0;

    airfare::SynthOutput out = airfare::generate(dgp);
    airfare::BuildResult built =
        airfare::build_features(out.quotes, out.calendar, out.exogenous, out.spec);

    BenchData data;
    const long n = long(built.observations.size());
    data.columns.resize(n, built.matrix.values.cols() + 1);
    for (long i = 0; i < n; ++i) {
        data.columns(i, 0) = built.observations[size_t(i)].y;
    }
    data.columns.rightCols(built.matrix.values.cols()) = built.matrix.values;
    data.groups =
        airfare::FEGroups::from_observations(built.observations, true, true, true);
    return data;
}

void bench_reference(benchmark::State& state) {
    BenchData data = make_data(state.range(0));
    for (auto _ : state) {
        Eigen::MatrixXd work = data.columns;
        airfare::DemeanState result = airfare::demean_matrix_reference(work, data.groups);
        benchmark::DoNotOptimize(result.iterations);
    }
}

void bench_kernel_serial(benchmark::State& state) {
    BenchData data = make_data(state.range(0));
    airfare::DemeanOptions options;
    options.parallel = false;
    for (auto _ : state) {
        Eigen::MatrixXd work = data.columns;
        airfare::DemeanState result = airfare::demean_matrix(work, data.groups, options);
        benchmark::DoNotOptimize(result.iterations);
    }
}

void bench_kernel_parallel(benchmark::State& state) {
    BenchData data = make_data(state.range(0));
    airfare::DemeanOptions options;
    options.parallel = true;
    for (auto _ : state) {
        Eigen::MatrixXd work = data.columns;
        airfare::DemeanState result = airfare::demean_matrix(work, data.groups, options);
        benchmark::DoNotOptimize(result.iterations);
    }
}

}  // namespace

BENCHMARK(bench_reference)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_kernel_serial)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_kernel_parallel)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
