#ifndef DRAM_ORACLE_MODELS_INTERNAL_HPP
#define DRAM_ORACLE_MODELS_INTERNAL_HPP

#include <vector>

#include "dram_oracle/models.hpp"

namespace dram_oracle::detail {

// Shared by the tree and SVR trainers: standardized design matrix plus
// transformed targets.
RdfParams train_rdf(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                    const ModelConfig& cfg, Exec exec);
double rdf_predict(const RdfParams& p, std::span<const double> x);

SvrParams train_svr(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                    const ModelConfig& cfg);
double svr_predict(const SvrParams& p, std::span<const double> x);

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

}  // namespace dram_oracle::detail

#endif
