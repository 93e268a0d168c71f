#ifndef DRAM_ORACLE_MODELS_HPP
#define DRAM_ORACLE_MODELS_HPP

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dram_oracle/config.hpp"
#include "dram_oracle/dataset.hpp"

namespace dram_oracle {

enum class ModelKind : uint8_t { knn = 0, rdf = 1, svr = 2, baseline = 3 };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

enum class FeatureSetId : uint8_t { set1 = 1, set2 = 2, set3 = 3 };

// Exact column subsets per set id. Set1/Set2 are the strongly correlated
// features plus environment; Set3 is environment plus every program feature.
// Throws ValidationError when a required column is missing from the schema.
std::vector<std::string> select_features(FeatureSetId id,
                                         const std::vector<std::string>& schema);

// WER targets are fitted in log10(t + 1e-12) space; P_UE in raw space.
enum class TargetTransform : uint8_t { identity = 0, log10_eps = 1 };

struct ModelConfig {
    ModelKind kind = ModelKind::knn;
    FeatureSetId feature_set = FeatureSetId::set1;
    // knn: k = 0 lets the evaluation harness sweep {1,3,5,7}.
    uint32_t k = 5;
    // rdf
    uint32_t n_trees = 100;
    int32_t max_depth = -1;  // unlimited
    uint32_t min_leaf = 2;
    bool bootstrap = true;
    bool feature_subsample = true;  // sqrt(d) features per split
    // svr
    double c = 10.0;
    double epsilon = 0.01;
    double gamma = 0.0;  // 0 selects 1/d
    double svr_tol = 1e-3;
    uint64_t svr_max_iter = 10'000'000;
    uint64_t seed = 1;
};

// Per-column standardization to mean 0, sd 1 (population sd). Zero-variance
// columns pass through unscaled and are flagged.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> sd;
    std::vector<uint8_t> constant;

    size_t dims() const { return mean.size(); }
    void apply(std::span<double> row) const;
    void unapply(std::span<double> row) const;

    bool operator==(const Scaler&) const = default;
};

Scaler fit_scaler(const std::vector<std::vector<double>>& rows);

struct KnnParams {
    uint32_t k = 1;
    std::vector<std::vector<double>> points;  // standardized
    std::vector<double> targets;              // transformed space
    bool operator==(const KnnParams&) const = default;
};

struct TreeNode {
    int32_t feature = -1;     // -1 marks a leaf
    double threshold = 0.0;   // x <= threshold routes left (left-max value)
    uint32_t left = 0;
    uint32_t right = 0;
    double value = 0.0;       // leaf mean
    bool operator==(const TreeNode&) const = default;
};

struct RdfParams {
    std::vector<std::vector<TreeNode>> trees;
    bool operator==(const RdfParams&) const = default;
};

struct SvrParams {
    std::vector<std::vector<double>> support;  // standardized points
    std::vector<double> coef;                  // beta_i
    double bias = 0.0;
    double gamma = 1.0;
    bool operator==(const SvrParams&) const = default;
};

struct BaselineParams {
    struct Cell {
        std::string device;  // empty for the device-pooled fallback table
        double t_refp_s = 0.0;
        double temp_c = 0.0;
        double mean = 0.0;
        uint64_t n = 0;
        bool operator==(const Cell&) const = default;
    };
    std::vector<Cell> cells;      // exact (device, t_refp, temp) means
    std::vector<Cell> env_cells;  // (t_refp, temp) means pooled over devices
    bool operator==(const BaselineParams&) const = default;
};

struct TrainedModel {
    ModelKind kind = ModelKind::knn;
    FeatureSetId feature_set = FeatureSetId::set1;
    TargetKind target_kind = TargetKind::wer;
    TargetTransform transform = TargetTransform::identity;
    std::vector<std::string> columns;       // numeric inputs (device_ordinal last)
    std::vector<std::string> device_order;  // sorted ids -> ordinal
    Scaler scaler;
    std::variant<KnnParams, RdfParams, SvrParams, BaselineParams> params;
};

TrainedModel train_model(const Dataset& ds, const ModelConfig& cfg, Exec exec = Exec::parallel);

// Pre-resolved column mapping from a dataset schema to a model's inputs, so
// repeated predictions avoid per-query name lookups.
struct BoundModel {
    const TrainedModel* model = nullptr;
    std::vector<size_t> feature_idx;  // schema indices of model columns

    double predict(std::span<const double> schema_row, const std::string& device) const;
};

BoundModel bind_model(const TrainedModel& model, const std::vector<std::string>& schema);

double predict(const TrainedModel& model, const Dataset& ds, size_t row);
double predict(const TrainedModel& model, const std::vector<std::string>& schema,
               std::span<const double> features, const std::string& device);

// Model file format "DOML": versioned little-endian container with kind tag,
// scaler block and kind-specific payload. Round-trips predictions bit-exactly.
inline constexpr char kModelMagic[4] = {'D', 'O', 'M', 'L'};
inline constexpr uint16_t kModelVersion = 1;

void write_model(const TrainedModel& model, std::ostream& sink);
void write_model_file(const TrainedModel& model, const std::string& path);
TrainedModel read_model(std::istream& source);
TrainedModel read_model_file(const std::string& path);

}  // namespace dram_oracle

#endif
