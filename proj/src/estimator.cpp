#include "airfare/estimator.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

namespace airfare {

OlsResult ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
    const long n = y.rows();
    const int p = int(x.cols());
    if (p == 0) {
        throw ValidationError("ols: no regressor columns");
    }
    if (x.rows() != n) {
        throw ValidationError("ols: y and X row mismatch");
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pivoted;
    pivoted.setThreshold(kRankTolerance);
    pivoted.compute(x);
    const int rank = int(pivoted.rank());
    if (rank == 0) {
        throw ValidationError("ols: no usable columns (all below rank tolerance)");
    }
    if (n < rank) {
        throw ValidationError("ols: fewer rows than usable columns");
    }

    const auto& perm = pivoted.colsPermutation().indices();
    OlsResult result;
    for (int i = 0; i < p; ++i) {
        (i < rank ? result.kept : result.dropped).push_back(perm[i]);
    }
    std::sort(result.kept.begin(), result.kept.end());
    std::sort(result.dropped.begin(), result.dropped.end());

    Eigen::MatrixXd x_kept(n, rank);
    for (int j = 0; j < rank; ++j) {
        x_kept.col(j) = x.col(result.kept[size_t(j)]);
    }

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x_kept);
    result.beta = qr.solve(y);
    result.residuals = y - x_kept * result.beta;

    // (X'X)^{-1} = R^{-1} R^{-T} from the unpivoted factorization.
    Eigen::MatrixXd r_factor =
        qr.matrixQR().topRows(rank).triangularView<Eigen::Upper>();
    Eigen::MatrixXd r_inverse = r_factor.triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd::Identity(rank, rank));
    result.xtx_inverse = r_inverse * r_inverse.transpose();
    return result;
}

long df_residual(long n, long k_used, const FEGroups& groups) {
    const long absorbed = groups.absorbed_params();
    const long df = n - k_used - absorbed;
    if (df < 1) {
        throw ValidationError("non-positive residual degrees of freedom: n=" +
                              std::to_string(n) + " k=" + std::to_string(k_used) +
                              " absorbed=" + std::to_string(absorbed));
    }
    return df;
}

double t_test_p_value(double t_stat, long df) {
    boost::math::students_t dist{double(df)};
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t_stat)));
}

double t_quantile(double probability, long df) {
    boost::math::students_t dist{double(df)};
    return boost::math::quantile(dist, probability);
}

std::vector<CoefficientStat> inference(const OlsResult& fit,
                                       const std::vector<std::string>& names,
                                       const Eigen::MatrixXd& x_demeaned, long df,
                                       const InferenceOptions& options) {
    if (df < 1) {
        throw ValidationError("inference requires df >= 1");
    }
    const long n = fit.residuals.rows();
    const int rank = int(fit.beta.rows());
    const double sigma2 = fit.residuals.squaredNorm() / double(df);

    Eigen::MatrixXd covariance;
    if (!options.robust) {
        covariance = sigma2 * fit.xtx_inverse;
    } else {
        // HC1 sandwich with the absorbed-corrected small-sample factor n/df.
        Eigen::MatrixXd x_kept(n, rank);
        for (int j = 0; j < rank; ++j) {
            x_kept.col(j) = x_demeaned.col(fit.kept[size_t(j)]);
        }
        Eigen::MatrixXd weighted =
            x_kept.array().colwise() * fit.residuals.array().square();
        Eigen::MatrixXd meat = x_kept.transpose() * weighted;
        covariance = fit.xtx_inverse * meat * fit.xtx_inverse * (double(n) / double(df));
    }

    std::vector<CoefficientStat> stats;
    stats.reserve(size_t(rank));
    for (int j = 0; j < rank; ++j) {
        const int column = fit.kept[size_t(j)];
        const double variance = covariance(j, j);
        if (!(variance > 0.0) || !std::isfinite(variance)) {
            throw ValidationError("singular covariance for regressor '" +
                                  names[size_t(column)] + "'");
        }
        CoefficientStat stat;
        stat.name = names[size_t(column)];
        stat.coefficient = fit.beta[j];
        stat.std_error = std::sqrt(variance);
        stat.t_stat = stat.coefficient / stat.std_error;
        stat.p_value = t_test_p_value(stat.t_stat, df);
        stat.stars = significance_stars(stat.p_value);
        stats.push_back(std::move(stat));
    }
    return stats;
}

RSquared r_squared(const Eigen::VectorXd& y_original,
                   const Eigen::VectorXd& y_demeaned,
                   const Eigen::VectorXd& residuals, long df) {
    const long n = y_original.rows();
    const double ssr = residuals.squaredNorm();
    const double y_mean = y_original.mean();
    const double sst = (y_original.array() - y_mean).square().sum();
    const double ssw = y_demeaned.squaredNorm();

    RSquared r2;
    r2.overall = sst > 0.0 ? 1.0 - ssr / sst : (ssr == 0.0 ? 1.0 : 0.0);
    r2.within = ssw > 0.0 ? 1.0 - ssr / ssw : (ssr == 0.0 ? 1.0 : 0.0);
    r2.adjusted = 1.0 - (1.0 - r2.overall) * double(n - 1) / double(df);
    return r2;
}

LsdvResult lsdv_oracle(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                       const FEGroups& groups) {
    const long n = y.rows();
    if (n > 10000) {
        throw ValidationError("lsdv_oracle guard: n > 10000");
    }
    long dummies = 0;
    for (int k = 0; k < groups.dimension_count(); ++k) {
        dummies += groups.level_count(k) - (k > 0 ? 1 : 0);
    }
    if (dummies > 2000) {
        throw ValidationError("lsdv_oracle guard: dummy columns > 2000");
    }

    const int slopes = int(x.cols());
    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(n, slopes + dummies);
    design.leftCols(slopes) = x;
    long offset = slopes;
    for (int k = 0; k < groups.dimension_count(); ++k) {
        const auto& index = groups.indices(k);
        const int skip = k > 0 ? 1 : 0;  // later dimensions drop level 0
        for (long i = 0; i < n; ++i) {
            const int g = index[size_t(i)];
            if (g >= skip) {
                design(i, offset + g - skip) = 1.0;
            }
        }
        offset += groups.level_count(k) - skip;
    }

    // Complete orthogonal decomposition: a disconnected panel leaves the
    // design rank deficient even after dropping the baseline levels, and the
    // minimum-norm solve keeps the slope block well defined there. A pivoted
    // QR solve would run through the near-zero trailing pivots instead.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(kRankTolerance);
    cod.compute(design);

    LsdvResult result;
    Eigen::VectorXd solution = cod.solve(y);
    result.slopes = solution.head(slopes);
    result.design_rank = long(cod.rank());
    result.dummy_columns = dummies;
    return result;
}

std::vector<FareQuote> apply_subset_filter(const std::vector<FareQuote>& quotes,
                                           const ModelSpec& spec) {
    std::vector<FareQuote> kept;
    kept.reserve(quotes.size());
    for (const auto& quote : quotes) {
        if (!spec.origin_airports.empty() &&
            std::find(spec.origin_airports.begin(), spec.origin_airports.end(),
                      quote.origin_airport) == spec.origin_airports.end()) {
            continue;
        }
        if (spec.stops_filter >= 0 && quote.stops != spec.stops_filter) {
            continue;
        }
        kept.push_back(quote);
    }
    return kept;
}

FitResult fit_observations(const std::vector<PanelObservation>& observations,
                           const std::vector<std::string>& regressor_names,
                           const ModelSpec& spec, const FitOptions& options) {
    const long n = long(observations.size());
    if (n == 0) {
        throw ValidationError("fit: empty sample");
    }
    const int p = int(regressor_names.size());
    for (const auto& obs : observations) {
        if (int(obs.x.size()) != p) {
            throw ValidationError("fit: observation regressor count mismatch");
        }
    }

    Eigen::VectorXd y(n);
    Eigen::MatrixXd x(n, p);
    for (long i = 0; i < n; ++i) {
        y[i] = observations[size_t(i)].y;
        for (int c = 0; c < p; ++c) {
            x(i, c) = observations[size_t(i)].x[size_t(c)];
        }
    }

    FEGroups groups =
        FEGroups::from_observations(observations, spec.absorb_entity,
                                    spec.absorb_quote_period, spec.absorb_depart_period);

    DemeanResult demeaned = demean(y, x, groups, options.demean);
    OlsResult solved = ols(demeaned.y, demeaned.x);
    const long df = df_residual(n, long(solved.kept.size()), groups);

    FitResult result;
    result.coefficients =
        inference(solved, regressor_names, demeaned.x, df, options.inference);
    for (int column : solved.dropped) {
        result.dropped_columns.push_back(
            {regressor_names[size_t(column)], "collinear"});
    }
    result.n_obs = n;
    result.df_residual = df;
    result.sigma2 = solved.residuals.squaredNorm() / double(df);
    const RSquared r2 = r_squared(y, demeaned.y, solved.residuals, df);
    result.r2_overall = r2.overall;
    result.adj_r2 = r2.adjusted;
    result.r2_within = r2.within;
    result.robust_se = options.inference.robust;
    result.fe = groups.diagnostics();
    result.residuals.assign(solved.residuals.data(),
                            solved.residuals.data() + solved.residuals.rows());
    result.demean_iterations = demeaned.state.iterations;
    result.demean_last_change = demeaned.state.last_change;
    return result;
}

FitResult fit(const std::vector<FareQuote>& quotes, const HolidayCalendar& calendar,
              const ExogenousData& exogenous, const ModelSpec& spec,
              const FitOptions& options) {
    spec.validate();
    std::vector<FareQuote> filtered = apply_subset_filter(quotes, spec);
    if (filtered.empty()) {
        throw ValidationError("no rows left after the subset filter");
    }
    BuildResult build = build_features(filtered, calendar, exogenous, spec);
    return fit_observations(build.observations, build.matrix.names, spec, options);
}

}  // namespace airfare
