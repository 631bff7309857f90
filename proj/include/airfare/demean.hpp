#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "airfare/core.hpp"

namespace airfare {

/**
 * @brief Dense group-index arrays for the absorbed dimensions of one sample.
 *
 * Dimension order is fixed (entity, quote period, depart period) so demeaning
 * sweeps are reproducible. Group ids are assigned by first appearance in row
 * order, which is deterministic because the sample arrives in canonical order.
 */
class FEGroups {
public:
    static FEGroups from_observations(const std::vector<PanelObservation>& observations,
                                      bool absorb_entity, bool absorb_quote,
                                      bool absorb_depart);

    /// Builds one dimension directly from key strings (test fixtures).
    void add_dimension(const std::string& name, const std::vector<std::string>& keys);

    int dimension_count() const { return int(dims_.size()); }
    long rows() const { return rows_; }

    const std::string& dimension_name(int dim) const { return dims_[size_t(dim)].name; }
    const std::vector<int>& indices(int dim) const { return dims_[size_t(dim)].index; }
    long level_count(int dim) const { return dims_[size_t(dim)].levels; }
    const std::vector<std::string>& labels(int dim) const {
        return dims_[size_t(dim)].labels;
    }

    /// Number of groups (over all dimensions) containing exactly one row.
    long singleton_group_count() const;

    /// Connected components of the bipartite graph linking the first two
    /// dimensions; 1 when fewer than two dimensions are absorbed.
    long connected_components() const;

    /// Absorbed-parameter count: L1 for one dimension, + (L2 - C) for the
    /// second, + (L3 - 1) for the third.
    long absorbed_params() const;

    FEDiagnostics diagnostics() const;

private:
    struct Dimension {
        std::string name;
        std::vector<int> index;  // row -> group id
        long levels = 0;
        std::vector<std::string> labels;  // group id -> key
    };

    std::vector<Dimension> dims_;
    long rows_ = 0;
};

struct DemeanOptions {
    /// Relative tolerance: a column is converged when one full sweep changes
    /// no value by more than tol * (column max-abs) and every group mean is
    /// below the same bound.
    double tol = 1e-8;
    int max_iter = 10000;
    /// Column-parallel OpenMP path; bit-identical to the serial one.
    bool parallel = true;
};

/// Convergence record of one demeaning run (worst column governs).
struct DemeanState {
    int iterations = 0;
    double last_change = 0.0;  // scaled by column max-abs
    std::vector<int> column_iterations;
};

/**
 * @brief Alternating-projections demeaning (Halperin sweeps) of every column
 * of `columns`, in place. Each column is centered independently: repeatedly
 * subtract per-dimension group means until a full sweep moves nothing beyond
 * tolerance. Throws ConvergenceError when max_iter sweeps are not enough.
 */
DemeanState demean_matrix(Eigen::MatrixXd& columns, const FEGroups& groups,
                          const DemeanOptions& options = {});

/// Serial reference implementation kept for testing; same sweep arithmetic,
/// plain loops, no OpenMP. demean_matrix must match it bit for bit.
DemeanState demean_matrix_reference(Eigen::MatrixXd& columns, const FEGroups& groups,
                                    const DemeanOptions& options = {});

/// demean(y, X): copies inputs, demeans them jointly, returns the pair.
struct DemeanResult {
    Eigen::VectorXd y;
    Eigen::MatrixXd x;
    DemeanState state;
};

DemeanResult demean(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                    const FEGroups& groups, const DemeanOptions& options = {});

}  // namespace airfare
