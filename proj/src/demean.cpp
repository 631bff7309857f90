#include "airfare/demean.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace airfare {

void FEGroups::add_dimension(const std::string& name,
                             const std::vector<std::string>& keys) {
    if (keys.empty()) {
        throw ValidationError("fixed-effect dimension '" + name + "' has no rows");
    }
    if (rows_ == 0) {
        rows_ = long(keys.size());
    } else if (long(keys.size()) != rows_) {
        throw ValidationError("fixed-effect dimension '" + name +
                              "' row count mismatch");
    }
    Dimension dim;
    dim.name = name;
    dim.index.reserve(keys.size());
    std::unordered_map<std::string, int> ids;
    for (const auto& key : keys) {
        if (key.empty()) {
            throw ValidationError("empty group key in dimension '" + name + "'");
        }
        auto [it, inserted] = ids.emplace(key, int(dim.labels.size()));
        if (inserted) {
            dim.labels.push_back(key);
        }
        dim.index.push_back(it->second);
    }
    dim.levels = long(dim.labels.size());
    dims_.push_back(std::move(dim));
}

FEGroups FEGroups::from_observations(const std::vector<PanelObservation>& observations,
                                     bool absorb_entity, bool absorb_quote,
                                     bool absorb_depart) {
    if (observations.empty()) {
        throw ValidationError("cannot build FE groups from an empty sample");
    }
    FEGroups groups;
    std::vector<std::string> keys(observations.size());
    if (absorb_entity) {
        std::transform(observations.begin(), observations.end(), keys.begin(),
                       [](const PanelObservation& o) { return o.entity_key; });
        groups.add_dimension("entity", keys);
    }
    if (absorb_quote) {
        std::transform(observations.begin(), observations.end(), keys.begin(),
                       [](const PanelObservation& o) { return o.quote_period_key; });
        groups.add_dimension("quote_period", keys);
    }
    if (absorb_depart) {
        std::transform(observations.begin(), observations.end(), keys.begin(),
                       [](const PanelObservation& o) { return o.depart_period_key; });
        groups.add_dimension("depart_period", keys);
    }
    if (groups.dimension_count() == 0) {
        throw ValidationError("at least one fixed-effect dimension is required");
    }
    return groups;
}

long FEGroups::singleton_group_count() const {
    long singletons = 0;
    for (const auto& dim : dims_) {
        std::vector<long> counts(size_t(dim.levels), 0);
        for (int g : dim.index) ++counts[size_t(g)];
        singletons += std::count(counts.begin(), counts.end(), 1L);
    }
    return singletons;
}

namespace {

struct UnionFind {
    std::vector<int> parent;

    explicit UnionFind(long n) : parent(size_t(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int a) {
        while (parent[size_t(a)] != a) {
            parent[size_t(a)] = parent[size_t(parent[size_t(a)])];
            a = parent[size_t(a)];
        }
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[size_t(b)] = a;
    }
};

}  // namespace

long FEGroups::connected_components() const {
    if (dims_.size() < 2) return 1;
    const Dimension& first = dims_[0];
    const Dimension& second = dims_[1];
    UnionFind uf(first.levels + second.levels);
    for (long i = 0; i < rows_; ++i) {
        uf.unite(first.index[size_t(i)], int(first.levels) + second.index[size_t(i)]);
    }
    std::vector<char> seen(size_t(first.levels + second.levels), 0);
    long components = 0;
    for (long v = 0; v < first.levels + second.levels; ++v) {
        int root = uf.find(int(v));
        if (!seen[size_t(root)]) {
            seen[size_t(root)] = 1;
            ++components;
        }
    }
    return components;
}

long FEGroups::absorbed_params() const {
    long absorbed = 0;
    for (size_t k = 0; k < dims_.size(); ++k) {
        if (k == 0) {
            absorbed += dims_[k].levels;
        } else if (k == 1) {
            absorbed += dims_[k].levels - connected_components();
        } else {
            absorbed += dims_[k].levels - 1;
        }
    }
    return absorbed;
}

FEDiagnostics FEGroups::diagnostics() const {
    FEDiagnostics diag;
    for (const auto& dim : dims_) {
        diag.levels.emplace_back(dim.name, dim.levels);
    }
    diag.absorbed_params = absorbed_params();
    diag.connected_components = connected_components();
    diag.singleton_groups = singleton_group_count();
    return diag;
}

namespace {

struct DimView {
    const int* index;
    long levels;
    const long* counts;
};

// Group counts per dimension, shared by every column.
std::vector<std::vector<long>> group_counts(const FEGroups& groups) {
    std::vector<std::vector<long>> counts(size_t(groups.dimension_count()));
    for (int k = 0; k < groups.dimension_count(); ++k) {
        counts[size_t(k)].assign(size_t(groups.level_count(k)), 0);
        for (int g : groups.indices(k)) ++counts[size_t(k)][size_t(g)];
    }
    return counts;
}

double column_scale(const double* x, long n) {
    double scale = 0.0;
    for (long i = 0; i < n; ++i) scale = std::max(scale, std::fabs(x[i]));
    return scale;
}

// One Halperin sweep over all dimensions; sums accumulate in row order so the
// serial and parallel paths agree bit for bit.
void sweep(double* x, long n, const std::vector<DimView>& dims,
           std::vector<double>& means) {
    for (const DimView& dim : dims) {
        means.assign(size_t(dim.levels), 0.0);
        for (long i = 0; i < n; ++i) means[size_t(dim.index[i])] += x[i];
        for (long g = 0; g < dim.levels; ++g) means[size_t(g)] /= double(dim.counts[g]);
        for (long i = 0; i < n; ++i) x[i] -= means[size_t(dim.index[i])];
    }
}

bool group_means_within(const double* x, long n, const std::vector<DimView>& dims,
                        std::vector<double>& sums, double threshold) {
    for (const DimView& dim : dims) {
        sums.assign(size_t(dim.levels), 0.0);
        for (long i = 0; i < n; ++i) sums[size_t(dim.index[i])] += x[i];
        for (long g = 0; g < dim.levels; ++g) {
            if (std::fabs(sums[size_t(g)] / double(dim.counts[g])) > threshold) {
                return false;
            }
        }
    }
    return true;
}

// Centers one column in place. Returns iterations used; `last_change` gets
// the final sweep's max change relative to the column scale.
int center_column(double* x, long n, const std::vector<DimView>& dims,
                  const DemeanOptions& options, double& last_change) {
    const double scale = column_scale(x, n);
    last_change = 0.0;
    if (scale == 0.0) return 0;
    const double threshold = options.tol * scale;

    std::vector<double> means;
    if (dims.size() == 1) {
        // A single dimension is an exact projection: one sweep and done.
        sweep(x, n, dims, means);
        return 1;
    }

    std::vector<double> previous(static_cast<size_t>(n));
    for (int iter = 1; iter <= options.max_iter; ++iter) {
        std::copy(x, x + n, previous.begin());
        sweep(x, n, dims, means);
        double change = 0.0;
        for (long i = 0; i < n; ++i) {
            change = std::max(change, std::fabs(x[i] - previous[size_t(i)]));
        }
        last_change = change / scale;
        if (change < threshold && group_means_within(x, n, dims, means, threshold)) {
            return iter;
        }
    }
    throw ConvergenceError("demeaning did not converge", last_change,
                           options.max_iter);
}

std::vector<DimView> dim_views(const FEGroups& groups,
                               const std::vector<std::vector<long>>& counts) {
    std::vector<DimView> dims;
    for (int k = 0; k < groups.dimension_count(); ++k) {
        dims.push_back({groups.indices(k).data(), groups.level_count(k),
                        counts[size_t(k)].data()});
    }
    return dims;
}

void check_options(const DemeanOptions& options) {
    if (options.tol < 0.0) {
        throw ValidationError("demean tolerance must be non-negative");
    }
    if (options.max_iter < 1) {
        throw ValidationError("demean max_iter must be >= 1");
    }
}

}  // namespace

DemeanState demean_matrix(Eigen::MatrixXd& columns, const FEGroups& groups,
                          const DemeanOptions& options) {
    check_options(options);
    const long n = columns.rows();
    if (n != groups.rows()) {
        throw ValidationError("demean: matrix rows do not match group rows");
    }
    const auto counts = group_counts(groups);
    const std::vector<DimView> dims = dim_views(groups, counts);
    const int p = int(columns.cols());

    DemeanState state;
    state.column_iterations.assign(size_t(p), 0);
    std::vector<double> column_change(size_t(p), 0.0);
    std::atomic<bool> failed{false};
    double failed_change = 0.0;

#pragma omp parallel for schedule(dynamic) if (options.parallel)
    for (int c = 0; c < p; ++c) {
        if (failed.load(std::memory_order_relaxed)) continue;
        try {
            double change = 0.0;
            state.column_iterations[size_t(c)] =
                center_column(columns.col(c).data(), n, dims, options, change);
            column_change[size_t(c)] = change;
        } catch (const ConvergenceError& e) {
#pragma omp critical
            {
                failed.store(true, std::memory_order_relaxed);
                failed_change = e.last_change();
            }
        }
    }
    if (failed.load()) {
        throw ConvergenceError("demeaning did not converge", failed_change,
                               options.max_iter);
    }
    for (int c = 0; c < p; ++c) {
        state.iterations = std::max(state.iterations, state.column_iterations[size_t(c)]);
        state.last_change = std::max(state.last_change, column_change[size_t(c)]);
    }
    return state;
}

DemeanState demean_matrix_reference(Eigen::MatrixXd& columns, const FEGroups& groups,
                                    const DemeanOptions& options) {
    check_options(options);
    const long n = columns.rows();
    if (n != groups.rows()) {
        throw ValidationError("demean: matrix rows do not match group rows");
    }
    // Row lists per group, rows ascending: the same accumulation order as the
    // streaming kernel, so results match exactly.
    const int K = groups.dimension_count();
    std::vector<std::vector<std::vector<long>>> rows_of(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) {
        rows_of[size_t(k)].resize(size_t(groups.level_count(k)));
        const auto& index = groups.indices(k);
        for (long i = 0; i < n; ++i) {
            rows_of[size_t(k)][size_t(index[size_t(i)])].push_back(i);
        }
    }

    auto one_sweep = [&](Eigen::MatrixXd& m, int c) {
        for (int k = 0; k < K; ++k) {
            for (const auto& rows : rows_of[size_t(k)]) {
                double sum = 0.0;
                for (long i : rows) sum += m(i, c);
                const double mean = sum / double(rows.size());
                for (long i : rows) m(i, c) -= mean;
            }
        }
    };
    auto means_ok = [&](Eigen::MatrixXd& m, int c, double threshold) {
        for (int k = 0; k < K; ++k) {
            for (const auto& rows : rows_of[size_t(k)]) {
                double sum = 0.0;
                for (long i : rows) sum += m(i, c);
                if (std::fabs(sum / double(rows.size())) > threshold) return false;
            }
        }
        return true;
    };

    DemeanState state;
    state.column_iterations.assign(size_t(columns.cols()), 0);
    for (int c = 0; c < columns.cols(); ++c) {
        double scale = 0.0;
        for (long i = 0; i < n; ++i) scale = std::max(scale, std::fabs(columns(i, c)));
        if (scale == 0.0) continue;
        const double threshold = options.tol * scale;

        if (K == 1) {
            one_sweep(columns, c);
            state.column_iterations[size_t(c)] = 1;
            state.iterations = std::max(state.iterations, 1);
            continue;
        }

        Eigen::VectorXd previous(n);
        bool converged = false;
        for (int iter = 1; iter <= options.max_iter && !converged; ++iter) {
            previous = columns.col(c);
            one_sweep(columns, c);
            double change = 0.0;
            for (long i = 0; i < n; ++i) {
                change = std::max(change, std::fabs(columns(i, c) - previous[i]));
            }
            const double scaled = change / scale;
            state.column_iterations[size_t(c)] = iter;
            if (change < threshold && means_ok(columns, c, threshold)) {
                converged = true;
                state.iterations = std::max(state.iterations, iter);
                state.last_change = std::max(state.last_change, scaled);
            } else if (iter == options.max_iter) {
                throw ConvergenceError("demeaning did not converge", scaled,
                                       options.max_iter);
            }
        }
    }
    return state;
}

DemeanResult demean(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                    const FEGroups& groups, const DemeanOptions& options) {
    Eigen::MatrixXd joined(y.rows(), x.cols() + 1);
    joined.col(0) = y;
    if (x.cols() > 0) {
        joined.rightCols(x.cols()) = x;
    }
    DemeanResult result;
    result.state = demean_matrix(joined, groups, options);
    result.y = joined.col(0);
    result.x = joined.rightCols(x.cols());
    return result;
}

}  // namespace airfare
