#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "airfare/core.hpp"

namespace airfare {

/// Window flags of one date relative to the holiday calendar. At most one of
/// eve/during/post is set; holiday_name identifies the winning holiday.
struct HolidayWindow {
    int eve = 0;
    int during = 0;
    int post = 0;
    std::optional<std::string> holiday_name;

    bool any() const { return eve || during || post; }

    bool operator==(const HolidayWindow&) const = default;
};

/// Calendar days between quotation and departure. Throws ValidationError when
/// departure precedes quotation.
long adv_days(Date quotation_date, Date departure_date);

/**
 * @brief One-hot advance-purchase bucket vector. Values below the first
 * threshold are the baseline (all zeros); otherwise the bucket of the largest
 * threshold <= adv_days wins, and values beyond the last threshold land in
 * the last bucket.
 */
std::vector<double> adv_bucket_dummies(long adv_days_value,
                                       const std::vector<int>& thresholds);

/**
 * @brief Flags `date` against every non-excluded holiday: eve is
 * [start - eve_days, start), during is the holiday span, post is the
 * `post_days` after it ends. When windows of two holidays overlap the nearer
 * holiday wins; ties go to the earlier calendar entry. With `length_filter`
 * set, only holidays of exactly that length are considered.
 *
 * Throws ValidationError when the calendar does not cover the date's year.
 */
HolidayWindow holiday_windows(Date date, const HolidayCalendar& calendar,
                              const HolidayWindowConfig& config,
                              std::optional<int> length_filter = std::nullopt);

/// Named columns over the assembled observations, one row per kept quote.
struct FeatureMatrix {
    std::vector<std::string> names;
    Eigen::MatrixXd values;  // rows x names.size()

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
    int column_index(const std::string& name) const;
};

/// build_features output: the matrix, the matching panel rows, and how many
/// input quotes were dropped for an unmatched exogenous join.
struct BuildResult {
    FeatureMatrix matrix;
    std::vector<PanelObservation> observations;
    long rows_dropped_unmatched = 0;
};

/**
 * @brief Constructs every regressor the model spec requests, joins the exogenous
 * series, applies the dependent-variable transform and attaches the three FE
 * keys. Rows with any unmatched join are dropped and counted; an empty result
 * after drops is fatal.
 */
BuildResult build_features(const std::vector<FareQuote>& quotes,
                           const HolidayCalendar& calendar,
                           const ExogenousData& exogenous, const ModelSpec& spec);

/// The full menu of regressor names build_features can produce for a spec
/// (useful for config validation and documentation).
std::vector<std::string> known_regressors(const ModelSpec& spec,
                                          const HolidayCalendar& calendar);

}  // namespace airfare
