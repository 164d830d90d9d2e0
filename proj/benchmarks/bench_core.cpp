#include <benchmark/benchmark.h>

#include "slicesim/analytics.hpp"
#include "slicesim/features.hpp"
#include "slicesim/fedsec.hpp"
#include "slicesim/learn.hpp"
#include "slicesim/telemetry.hpp"

using namespace slicesim;

namespace {

DatasetPartition sample_partition(std::size_t n) {
    auto spec = GeneratorSpec::defaults();
    return generate_partition(7, spec, "bottom", spec.probe_mixtures.at("bottom"), n);
}

void BM_GenerateSynthetic(benchmark::State& state) {
    auto spec = GeneratorSpec::defaults();
    for (auto _ : state) {
        auto parts = generate_synthetic(42, spec, static_cast<std::size_t>(state.range(0)));
        benchmark::DoNotOptimize(parts);
    }
}
BENCHMARK(BM_GenerateSynthetic)->Arg(500)->Arg(1500);

void BM_Featurize(benchmark::State& state) {
    auto part = sample_partition(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto f = featurize(part.records);
        benchmark::DoNotOptimize(f);
    }
}
BENCHMARK(BM_Featurize)->Arg(1500);

void BM_KMeans(benchmark::State& state) {
    auto part = sample_partition(2000);
    auto feats = featurize(part.records);
    for (auto _ : state) {
        auto result = kmeans(feats.matrix, static_cast<int>(state.range(0)), 3);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_KMeans)->Arg(4)->Arg(8)->Arg(15);

void BM_Pca(benchmark::State& state) {
    auto part = sample_partition(2000);
    auto feats = featurize(part.records);
    for (auto _ : state) {
        auto result = pca(feats.matrix);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_Pca);

void BM_TreeFit(benchmark::State& state) {
    auto part = sample_partition(1000);
    auto feats = featurize(part.records);
    for (auto _ : state) {
        Classifier clf(Algorithm::DecisionTree, {});
        clf.fit(feats.matrix, feats.labels, 5);
        benchmark::DoNotOptimize(clf);
    }
}
BENCHMARK(BM_TreeFit);

void BM_FedAvg(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    SoftmaxModel model = SoftmaxModel::zeros(d, 6);
    std::vector<AgentReport> reports;
    for (int a = 0; a < 3; ++a) {
        AgentReport r;
        r.agent_id = "agent-" + std::to_string(a);
        r.params = pack_softmax(model, a);
        r.n_samples = 1000 + static_cast<std::size_t>(a);
        reports.push_back(std::move(r));
    }
    for (auto _ : state) {
        auto avg = fedavg(reports);
        benchmark::DoNotOptimize(avg);
    }
}
BENCHMARK(BM_FedAvg)->Arg(11)->Arg(128);

void BM_SoftmaxEpoch(benchmark::State& state) {
    auto part = sample_partition(1500);
    auto feats = featurize(part.records);
    SoftmaxModel model = SoftmaxModel::zeros(static_cast<int>(feats.matrix.cols()), 6);
    SoftmaxOpts opts;
    int epoch = 0;
    for (auto _ : state) {
        softmax_train_epoch(model, feats.matrix, feats.labels, opts, 9, epoch++);
        benchmark::DoNotOptimize(model);
    }
}
BENCHMARK(BM_SoftmaxEpoch);

} // namespace

BENCHMARK_MAIN();
