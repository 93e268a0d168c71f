#include <algorithm>
#include <cmath>
#include <numeric>

#include "dram_oracle/rng.hpp"
#include "models_internal.hpp"

namespace dram_oracle::detail {

namespace {

constexpr uint64_t kBootstrapStream = 0x626f6f74;
constexpr uint64_t kFeatStream = 0x66656174;

struct TreeBuilder {
    const std::vector<std::vector<double>>& X;
    const std::vector<double>& y;
    uint32_t min_leaf;
    int32_t max_depth;
    uint32_t m_try;  // features examined per split
    uint64_t seed;
    uint64_t node_ctr = 0;
    std::vector<TreeNode> nodes;

    uint32_t leaf(double value) {
        TreeNode n;
        n.feature = -1;
        n.value = value;
        nodes.push_back(n);
        return static_cast<uint32_t>(nodes.size() - 1);
    }

    uint32_t build(std::vector<uint32_t>& idx, size_t lo, size_t hi, int32_t depth) {
        const size_t n = hi - lo;
        double sum = 0.0;
        for (size_t i = lo; i < hi; ++i) sum += y[idx[i]];
        const double mean = sum / static_cast<double>(n);

        bool pure = true;
        for (size_t i = lo; i < hi && pure; ++i) pure = y[idx[i]] == y[idx[lo]];
        if (pure || n < 2 * static_cast<size_t>(min_leaf) ||
            (max_depth >= 0 && depth >= max_depth))
            return leaf(mean);

        // Candidate features for this node.
        const size_t d = X[0].size();
        std::vector<uint32_t> feats(d);
        std::iota(feats.begin(), feats.end(), 0u);
        if (m_try < d) {
            const uint64_t node_seed = mix(seed, kFeatStream, node_ctr);
            for (size_t i = 0; i < m_try; ++i) {
                const size_t j = i + mix(node_seed, i) % (d - i);
                std::swap(feats[i], feats[j]);
            }
            feats.resize(m_try);
            std::sort(feats.begin(), feats.end());  // low-index tie preference
        }
        ++node_ctr;

        // Best split by variance reduction: maximize sum_l^2/n_l + sum_r^2/n_r.
        // Strict improvement keeps the first (lowest feature, lowest threshold)
        // winner on score ties.
        int best_feature = -1;
        double best_threshold = 0.0;
        double best_score = -1.0;
        std::vector<std::pair<double, uint32_t>> vals(n);
        for (uint32_t f : feats) {
            for (size_t i = 0; i < n; ++i) {
                const uint32_t s = idx[lo + i];
                vals[i] = {X[s][f], s};
            }
            std::sort(vals.begin(), vals.end());

            double left_sum = 0.0;
            for (size_t p = 1; p < n; ++p) {
                left_sum += y[vals[p - 1].second];
                if (vals[p].first == vals[p - 1].first) continue;  // not a boundary
                if (p < min_leaf || n - p < min_leaf) continue;
                const double right_sum = sum - left_sum;
                const double score = left_sum * left_sum / static_cast<double>(p) +
                                     right_sum * right_sum / static_cast<double>(n - p);
                if (score > best_score + 1e-12 * std::fabs(best_score)) {
                    best_score = score;
                    best_feature = static_cast<int>(f);
                    best_threshold = vals[p - 1].first;  // x <= left-max goes left
                }
            }
        }
        if (best_feature < 0) return leaf(mean);

        const auto mid = std::partition(idx.begin() + lo, idx.begin() + hi, [&](uint32_t s) {
            return X[s][static_cast<size_t>(best_feature)] <= best_threshold;
        });
        const size_t split = static_cast<size_t>(mid - idx.begin());
        if (split == lo || split == hi) return leaf(mean);

        TreeNode node;
        node.feature = best_feature;
        node.threshold = best_threshold;
        nodes.push_back(node);
        const uint32_t self = static_cast<uint32_t>(nodes.size() - 1);
        const uint32_t l = build(idx, lo, split, depth + 1);
        const uint32_t r = build(idx, split, hi, depth + 1);
        nodes[self].left = l;
        nodes[self].right = r;
        return self;
    }
};

std::vector<TreeNode> grow_tree(const std::vector<std::vector<double>>& X,
                                const std::vector<double>& y, const ModelConfig& cfg,
                                uint32_t tree_idx) {
    const size_t n = X.size();
    const uint64_t tree_seed = mix(cfg.seed, kBootstrapStream, tree_idx);

    std::vector<uint32_t> idx(n);
    if (cfg.bootstrap) {
        for (size_t i = 0; i < n; ++i)
            idx[i] = static_cast<uint32_t>(mix(tree_seed, i) % n);
        std::sort(idx.begin(), idx.end());  // canonical order for determinism
    } else {
        std::iota(idx.begin(), idx.end(), 0u);
    }

    const size_t d = X[0].size();
    const uint32_t m_try =
        cfg.feature_subsample
            ? std::max<uint32_t>(1, static_cast<uint32_t>(std::lround(std::sqrt(double(d)))))
            : static_cast<uint32_t>(d);

    TreeBuilder b{X, y, cfg.min_leaf, cfg.max_depth, m_try, tree_seed, 0, {}};
    std::vector<uint32_t> work = idx;
    b.build(work, 0, work.size(), 0);  // root lands at index 0
    return b.nodes;
}

}  // namespace

RdfParams train_rdf(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                    const ModelConfig& cfg, Exec exec) {
    if (cfg.n_trees < 1) throw ValidationError("rdf: n_trees must be >= 1");
    if (cfg.min_leaf < 1) throw ValidationError("rdf: min_leaf must be >= 1");
    if (X.empty()) throw ValidationError("rdf: empty dataset");

    RdfParams p;
    p.trees.resize(cfg.n_trees);
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int64_t t = 0; t < static_cast<int64_t>(cfg.n_trees); ++t)
            p.trees[static_cast<size_t>(t)] = grow_tree(X, y, cfg, static_cast<uint32_t>(t));
    } else {
        for (uint32_t t = 0; t < cfg.n_trees; ++t) p.trees[t] = grow_tree(X, y, cfg, t);
    }
    return p;
}

double rdf_predict(const RdfParams& p, std::span<const double> x) {
    double sum = 0.0;
    for (const auto& tree : p.trees) {
        uint32_t at = 0;
        while (tree[at].feature >= 0)
            at = x[static_cast<size_t>(tree[at].feature)] <= tree[at].threshold ? tree[at].left
                                                                                : tree[at].right;
        sum += tree[at].value;
    }
    return sum / static_cast<double>(p.trees.size());
}

}  // namespace dram_oracle::detail
