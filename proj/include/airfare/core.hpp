#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "airfare/date.hpp"
#include "airfare/errors.hpp"

namespace airfare {

/**
 * @brief One raw fare observation: an airline's price for a route, quoted on
 * one day for departure on another.
 *
 * Immutable after construction; validate() enforces the domain invariants
 * (departure not before quotation, positive price, non-negative stops).
 */
struct FareQuote {
    std::string airline;
    std::string origin_airport;
    std::string destination_airport;
    Date quotation_date;
    Date departure_date;
    int stops = 0;
    double price = 0.0;  // BRL
    bool is_domestic = true;

    void validate() const;

    bool operator==(const FareQuote&) const = default;
};

/// Named holiday: first day plus length in days. `excluded` keeps an entry in
/// the calendar (it still counts for coverage) without generating features.
struct HolidaySpec {
    std::string name;
    Date start_date;
    int length_days = 1;
    bool excluded = false;

    /// Day after the last holiday day.
    Date end_date() const { return start_date + length_days; }

    bool operator==(const HolidaySpec&) const = default;
};

/**
 * @brief Ordered list of holidays. Entry order is preserved because it is the
 * documented tie-break when two holidays' windows overlap at equal distance.
 */
class HolidayCalendar {
public:
    /// Validates the entry (length >= 1, name unique within its start year).
    void add(HolidaySpec spec);

    const std::vector<HolidaySpec>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

    /// True when the date's year falls inside [min entry year, max entry year].
    bool covers(Date date) const;

    bool operator==(const HolidayCalendar&) const = default;

private:
    std::vector<HolidaySpec> entries_;
};

/// Counts of competing airlines joined on (departure date, route).
struct AirlineCounts {
    double a_pair = 0;    // serving the airport pair
    double adj_pair = 0;  // serving adjacent pairs
    double airp_o = 0;    // serving the origin airport

    bool operator==(const AirlineCounts&) const = default;
};

/// Which quote date a period event dummy is evaluated against.
enum class EventDateField { quotation, departure };

/// Half-open-ended period dummy: 1 iff the chosen date is in [start, end].
struct EventRange {
    std::string name;
    Date start;
    std::optional<Date> end;  // missing = open ended
    EventDateField applies_to = EventDateField::quotation;

    bool contains(Date d) const { return d >= start && (!end || d <= *end); }

    bool operator==(const EventRange&) const = default;
};

/**
 * @brief Date-indexed shifters the regressions join against: the USD/BRL
 * rate and connecting-passenger counts by date, airline counts by date and
 * route, and the event windows (financial crisis, delay period, Azul entry).
 */
struct ExogenousData {
    std::map<Date, double> usd;       // joined on quotation date
    std::map<Date, double> conn_pax;  // joined on departure date
    std::map<std::tuple<Date, std::string, std::string>, AirlineCounts>
        airline_counts;  // key: (departure date, origin, destination)
    std::vector<EventRange> events;

    void validate() const;

    const EventRange* find_event(const std::string& name) const;
};

/// Start of the financial-crisis dummy when no explicit range is configured.
inline const Date kFinCrisisStart{2008, 10, 1};

/**
 * @brief One estimation-ready row: dependent value, regressor vector, and the
 * three group keys the estimator can absorb.
 */
struct PanelObservation {
    double y = 0.0;
    std::vector<double> x;  // ordered exactly as ModelSpec::regressors
    std::string entity_key;
    std::string quote_period_key;
    std::string depart_period_key;

    bool operator==(const PanelObservation&) const = default;
};

enum class TimeGranularity { day, month };
enum class DepVarTransform { raw, log100 };

TimeGranularity parse_granularity(const std::string& text);
DepVarTransform parse_depvar(const std::string& text);
const char* to_string(TimeGranularity g);
const char* to_string(DepVarTransform t);

/// Holiday window widths. The during-window is the holiday span itself; eve
/// and post extend `eve_days` before the start and `post_days` past the end.
struct HolidayWindowConfig {
    int eve_days = 1;
    int post_days = 1;
    /// Restrict the qholndays_N / dholndays_N columns to holidays of exactly
    /// this length.
    std::optional<int> holiday_length_filter = 3;

    void validate() const;

    bool operator==(const HolidayWindowConfig&) const = default;
};

/**
 * @brief Full description of one regression: regressor list, absorbed
 * dimensions, time granularity, sample subset and feature parameters.
 *
 * Two fits from equal ModelSpecs on equal inputs are bit-identical.
 */
struct ModelSpec {
    std::vector<std::string> regressors;

    bool absorb_entity = true;
    bool absorb_quote_period = true;
    bool absorb_depart_period = true;

    TimeGranularity granularity = TimeGranularity::month;
    DepVarTransform depvar = DepVarTransform::log100;

    /// Origin-airport subset; empty keeps every airport present in the data.
    std::vector<std::string> origin_airports;
    /// Exact stop count to keep; -1 keeps all.
    int stops_filter = -1;

    HolidayWindowConfig holiday_window;
    std::vector<int> adv_bucket_thresholds = {3, 5, 7, 10, 30, 45, 60};

    /// Directed airport pairs by default; false folds A->B with B->A.
    bool directed_pairs = true;

    /// Column-group heading in rendered tables.
    std::string label = "price";

    int fe_dimension_count() const {
        return int(absorb_entity) + int(absorb_quote_period) + int(absorb_depart_period);
    }

    void validate() const;

    bool operator==(const ModelSpec&) const = default;
};

/// Per-regressor estimate with classical (or robust) inference attached.
struct CoefficientStat {
    std::string name;
    double coefficient = 0.0;
    double std_error = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
    std::string stars;

    bool operator==(const CoefficientStat&) const = default;
};

/// Regressor removed before estimation, with the reason it was removed.
struct DroppedColumn {
    std::string name;
    std::string reason;

    bool operator==(const DroppedColumn&) const = default;
};

/// Level counts, absorbed-parameter count and connectivity diagnostics for
/// the fixed-effect dimensions of one fit.
struct FEDiagnostics {
    std::vector<std::pair<std::string, long>> levels;  // dimension name -> count
    long absorbed_params = 0;
    /// Connected components of the bipartite graph linking the first two
    /// absorbed dimensions; 1 when fewer than two dimensions.
    long connected_components = 1;
    long singleton_groups = 0;

    bool operator==(const FEDiagnostics&) const = default;
};

/**
 * @brief Everything a fitted model reports: coefficient table, fit statistics,
 * degrees of freedom, FE diagnostics and the residual vector.
 */
struct FitResult {
    std::vector<CoefficientStat> coefficients;
    std::vector<DroppedColumn> dropped_columns;

    long n_obs = 0;
    long df_residual = 0;
    double sigma2 = 0.0;       // u'u / df
    double r2_overall = 0.0;   // on original y, FE contributions included
    double adj_r2 = 0.0;       // 1 - (1-R^2)(n-1)/df
    double r2_within = 0.0;    // on demeaned y
    bool robust_se = false;

    FEDiagnostics fe;
    std::vector<double> residuals;  // u_it, in canonical row order

    int demean_iterations = 0;
    double demean_last_change = 0.0;

    const CoefficientStat* find(const std::string& name) const;

    bool operator==(const FitResult&) const = default;
};

/// Star label for a p-value under the strict thresholds
/// "*" p<0.05, "**" p<0.01, "***" p<0.001.
std::string significance_stars(double p_value);

/**
 * @brief Deterministic, injective key for the airline x airport-pair entity
 * dimension. Directed pairs by default; undirected folds the two directions.
 * Throws ValidationError on empty fields or fields containing the separator.
 */
std::string entity_key(const std::string& airline, const std::string& origin,
                       const std::string& destination, bool directed = true);

/// Period id for a date: "YYYY-MM" at month granularity, "YYYY-MM-DD" at day.
std::string period_key(Date date, TimeGranularity granularity);

}  // namespace airfare
