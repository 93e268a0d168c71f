#ifndef DRAM_ORACLE_EVAL_HPP
#define DRAM_ORACLE_EVAL_HPP

#include <map>
#include <span>
#include <string>
#include <vector>

#include "dram_oracle/models.hpp"

namespace dram_oracle {

// Mean percentage error, 100 * mean(|pred - actual| / actual). Samples with
// actual == 0 are excluded and counted separately.
struct MpeResult {
    double percent = 0.0;
    size_t n_used = 0;
    size_t n_zero_excluded = 0;
};

MpeResult mpe(std::span<const double> predictions, std::span<const double> actuals);

struct CrossValReport {
    ModelKind kind = ModelKind::knn;
    FeatureSetId feature_set = FeatureSetId::set1;
    TargetKind target_kind = TargetKind::wer;
    uint32_t knn_k = 0;  // resolved k for knn rows (after sweep)

    double overall_mpe = 0.0;  // mean of per-sample percentage errors
    size_t n_used = 0;
    size_t n_zero_excluded = 0;
    std::map<std::string, double> per_workload_mpe;
    std::map<std::string, size_t> per_workload_n;
    std::map<std::string, double> per_device_mpe;
    std::map<std::string, size_t> per_device_n;

    double train_ms_total = 0.0;
    double predict_us_median = 0.0;  // median over 100 repeated single queries
};

// Leave-one-out by workload: for each distinct workload, train on every
// other workload's samples and test on its own; percentage errors are pooled
// per sample. The scaler is fit on the training fold only. Deterministic for
// fixed config seeds. Throws ValidationError with < 2 distinct workloads.
CrossValReport loo_by_workload(const Dataset& ds, const ModelConfig& cfg,
                               Exec exec = Exec::parallel);

// Runs loo_by_workload per config. knn configs with k == 0 sweep
// k in {1,3,5,7} and report the best row.
std::vector<CrossValReport> compare_models(const Dataset& ds,
                                           const std::vector<ModelConfig>& configs,
                                           Exec exec = Exec::parallel);

std::string report_csv(const std::vector<CrossValReport>& reports);
std::string report_summary(const std::vector<CrossValReport>& reports);

// Minimal hand-rolled SVG bar chart (rect/line/text only).
void write_bar_chart_svg(const std::string& path, const std::string& title,
                         const std::map<std::string, double>& bars);

}  // namespace dram_oracle

#endif
