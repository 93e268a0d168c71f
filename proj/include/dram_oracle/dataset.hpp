#ifndef DRAM_ORACLE_DATASET_HPP
#define DRAM_ORACLE_DATASET_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dram_oracle/features.hpp"

namespace dram_oracle {

enum class TargetKind : uint8_t { wer = 0, p_ue = 1 };

std::string to_string(TargetKind t);
TargetKind target_kind_from_string(const std::string& s);

// Labeled samples grouped by workload identity for leave-one-out
// partitioning. feature_names follows feature_schema(); rows are numeric
// feature values in that order.
struct Dataset {
    std::vector<std::string> feature_names;
    std::vector<std::string> workloads;            // per row
    std::vector<std::string> devices;              // per row
    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    TargetKind target_kind = TargetKind::wer;

    size_t size() const { return rows.size(); }
    void add_row(const FeatureVector& fv, double target);
    std::map<std::string, std::vector<size_t>> workload_index() const;
    std::vector<std::string> distinct_devices() const;  // sorted unique
    size_t column(const std::string& name) const;       // throws on missing

    void validate() const;
};

// One shared CSV schema for build-dataset, train and crossval:
// workload,device,<feature_schema...>,<wer|p_ue>
void write_dataset_csv(const Dataset& ds, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

// Spearman |r_s| ranking of program features (env and device columns are not
// ranked) against the target, descending, ties broken by feature name.
// Constant feature columns report r_s = 0. Throws NumericError when the
// target is constant, ValidationError when the dataset has < 3 samples.
std::vector<std::pair<std::string, double>> rank_features(const Dataset& ds);

}  // namespace dram_oracle

#endif
