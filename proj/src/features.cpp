#include "airfare/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

namespace airfare {

long adv_days(Date quotation_date, Date departure_date) {
    if (departure_date < quotation_date) {
        throw ValidationError("departure " + departure_date.to_string() +
                              " precedes quotation " + quotation_date.to_string());
    }
    return departure_date - quotation_date;
}

std::vector<double> adv_bucket_dummies(long adv_days_value,
                                       const std::vector<int>& thresholds) {
    std::vector<double> dummies(thresholds.size(), 0.0);
    // Largest threshold <= adv_days wins; below the first -> baseline.
    for (size_t i = thresholds.size(); i-- > 0;) {
        if (adv_days_value >= thresholds[i]) {
            dummies[i] = 1.0;
            break;
        }
    }
    return dummies;
}

namespace {

// Distance from a date to a holiday's span: 0 inside, else days to the
// nearest span day. Used to pick the winner when windows overlap.
long span_distance(Date date, const HolidaySpec& holiday) {
    if (date < holiday.start_date) return holiday.start_date - date;
    if (date >= holiday.end_date()) return date - (holiday.end_date() - 1);
    return 0;
}

}  // namespace

HolidayWindow holiday_windows(Date date, const HolidayCalendar& calendar,
                              const HolidayWindowConfig& config,
                              std::optional<int> length_filter) {
    config.validate();
    if (!calendar.covers(date)) {
        throw ValidationError("date " + date.to_string() +
                              " is outside holiday calendar coverage");
    }
    HolidayWindow result;
    long best_distance = 0;
    for (const auto& holiday : calendar.entries()) {
        if (holiday.excluded) continue;
        if (length_filter && holiday.length_days != *length_filter) continue;
        const Date start = holiday.start_date;
        const Date end = holiday.end_date();
        HolidayWindow candidate;
        if (date >= start - config.eve_days && date < start) {
            candidate.eve = 1;
        } else if (date >= start && date < end) {
            candidate.during = 1;
        } else if (date >= end && date < end + config.post_days) {
            candidate.post = 1;
        } else {
            continue;
        }
        candidate.holiday_name = holiday.name;
        const long distance = span_distance(date, holiday);
        if (!result.any() || distance < best_distance) {
            result = candidate;
            best_distance = distance;
        }
    }
    return result;
}

int FeatureMatrix::column_index(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        throw ValidationError("no feature column named '" + name + "'");
    }
    return int(it - names.begin());
}

namespace {

enum class Kind {
    qut_eve,
    qut_during,
    qut_post,
    dept_eve,
    dept_during,
    dept_post,
    q_holndays,
    d_holndays,
    dept_named,
    adv_linear,
    adv_bucket,
    nstop,
    usd,
    conn_pax,
    nair_a_pair,
    nair_adj_pair,
    nair_airp_o,
    event,
};

struct ColumnPlan {
    Kind kind;
    size_t bucket = 0;       // adv_bucket: index into thresholds
    std::string holiday{};   // dept_named: holiday name
    EventRange event{};      // event: resolved range
};

bool parse_int_suffix(const std::string& text, int& out) {
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

std::string bucket_column_name(int threshold) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "adv_days_%02d", threshold);
    return buf;
}

bool calendar_has(const HolidayCalendar& calendar, const std::string& name) {
    for (const auto& h : calendar.entries()) {
        if (!h.excluded && h.name == name) return true;
    }
    return false;
}

ColumnPlan resolve_column(const std::string& name, const ModelSpec& spec,
                          const HolidayCalendar& calendar,
                          const ExogenousData& exogenous) {
    if (name == "hday_qut_eve") return {Kind::qut_eve};
    if (name == "hday_quote_n_of_days") return {Kind::qut_during};
    if (name == "hday_qut_post") return {Kind::qut_post};
    if (name == "hday_dept_eve") return {Kind::dept_eve};
    if (name == "hday_dept_n_of_days") return {Kind::dept_during};
    if (name == "hday_dept_post") return {Kind::dept_post};
    if (name == "adv_days") return {Kind::adv_linear};
    if (name == "nstop") return {Kind::nstop};
    if (name == "usd") return {Kind::usd};
    if (name == "conn_pax") return {Kind::conn_pax};
    if (name == "nairlines_a_pair") return {Kind::nair_a_pair};
    if (name == "nairlines_adj_pair") return {Kind::nair_adj_pair};
    if (name == "nairlines_airp_o") return {Kind::nair_airp_o};

    if (name.rfind("qholndays_", 0) == 0 || name.rfind("dholndays_", 0) == 0) {
        int length = 0;
        if (!parse_int_suffix(name.substr(10), length)) {
            throw ValidationError("bad holiday-length column '" + name + "'");
        }
        if (!spec.holiday_window.holiday_length_filter ||
            *spec.holiday_window.holiday_length_filter != length) {
            throw ValidationError(
                "column '" + name +
                "' requires holiday_length_filter = " + std::to_string(length));
        }
        return {name[0] == 'q' ? Kind::q_holndays : Kind::d_holndays};
    }

    if (name.rfind("hday_dept_", 0) == 0) {
        std::string holiday = name.substr(10);
        if (!calendar_has(calendar, holiday)) {
            throw ValidationError("column '" + name + "': no holiday named '" +
                                  holiday + "' in the calendar");
        }
        ColumnPlan plan{Kind::dept_named};
        plan.holiday = std::move(holiday);
        return plan;
    }

    if (name.rfind("adv_days_", 0) == 0) {
        int threshold = 0;
        if (!parse_int_suffix(name.substr(9), threshold)) {
            throw ValidationError("bad advance-day bucket column '" + name + "'");
        }
        auto it = std::find(spec.adv_bucket_thresholds.begin(),
                            spec.adv_bucket_thresholds.end(), threshold);
        if (it == spec.adv_bucket_thresholds.end()) {
            throw ValidationError("column '" + name +
                                  "' has no matching adv bucket threshold");
        }
        ColumnPlan plan{Kind::adv_bucket};
        plan.bucket = size_t(it - spec.adv_bucket_thresholds.begin());
        return plan;
    }

    if (name == "fin_crisis") {
        ColumnPlan plan{Kind::event};
        if (const EventRange* configured = exogenous.find_event("fin_crisis")) {
            plan.event = *configured;
        } else {
            plan.event = {"fin_crisis", kFinCrisisStart, std::nullopt,
                          EventDateField::quotation};
        }
        return plan;
    }
    if (const EventRange* configured = exogenous.find_event(name)) {
        ColumnPlan plan{Kind::event};
        plan.event = *configured;
        return plan;
    }

    throw ValidationError("unknown regressor '" + name + "'");
}

bool needs_windows(Kind k) {
    switch (k) {
        case Kind::qut_eve:
        case Kind::qut_during:
        case Kind::qut_post:
        case Kind::dept_eve:
        case Kind::dept_during:
        case Kind::dept_post:
        case Kind::q_holndays:
        case Kind::d_holndays:
        case Kind::dept_named:
            return true;
        default:
            return false;
    }
}

}  // namespace

BuildResult build_features(const std::vector<FareQuote>& quotes,
                           const HolidayCalendar& calendar,
                           const ExogenousData& exogenous, const ModelSpec& spec) {
    spec.validate();
    exogenous.validate();
    if (quotes.empty()) {
        throw ValidationError("no quotes to build features from");
    }

    std::vector<ColumnPlan> plans;
    plans.reserve(spec.regressors.size());
    bool any_window_column = false;
    for (const auto& name : spec.regressors) {
        plans.push_back(resolve_column(name, spec, calendar, exogenous));
        any_window_column = any_window_column || needs_windows(plans.back().kind);
    }

    if (any_window_column) {
        for (const auto& quote : quotes) {
            if (!calendar.covers(quote.quotation_date) ||
                !calendar.covers(quote.departure_date)) {
                throw ValidationError("quote dated " +
                                      quote.quotation_date.to_string() +
                                      " is outside holiday calendar coverage");
            }
        }
    }

    const long n = long(quotes.size());
    const int p = int(plans.size());
    const std::optional<int> length_filter = spec.holiday_window.holiday_length_filter;

    std::vector<double> row_values(size_t(n) * size_t(p));
    std::vector<char> keep(size_t(n), 1);

    // Row-wise assembly is pure per row, so the parallel loop is bit-stable.
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        const FareQuote& quote = quotes[size_t(i)];
        double* row = row_values.data() + size_t(i) * size_t(p);

        HolidayWindow qut, dept, qut_restricted, dept_restricted;
        bool have_qut = false, have_dept = false, have_qut_r = false,
             have_dept_r = false;
        const long advance = adv_days(quote.quotation_date, quote.departure_date);

        for (int c = 0; c < p && keep[size_t(i)]; ++c) {
            const ColumnPlan& plan = plans[size_t(c)];
            double value = 0.0;
            switch (plan.kind) {
                case Kind::qut_eve:
                case Kind::qut_during:
                case Kind::qut_post:
                    if (!have_qut) {
                        qut = holiday_windows(quote.quotation_date, calendar,
                                              spec.holiday_window);
                        have_qut = true;
                    }
                    value = plan.kind == Kind::qut_eve      ? qut.eve
                            : plan.kind == Kind::qut_during ? qut.during
                                                            : qut.post;
                    break;
                case Kind::dept_eve:
                case Kind::dept_during:
                case Kind::dept_post:
                    if (!have_dept) {
                        dept = holiday_windows(quote.departure_date, calendar,
                                               spec.holiday_window);
                        have_dept = true;
                    }
                    value = plan.kind == Kind::dept_eve      ? dept.eve
                            : plan.kind == Kind::dept_during ? dept.during
                                                             : dept.post;
                    break;
                case Kind::q_holndays:
                    if (!have_qut_r) {
                        qut_restricted = holiday_windows(quote.quotation_date, calendar,
                                                         spec.holiday_window,
                                                         length_filter);
                        have_qut_r = true;
                    }
                    value = qut_restricted.during;
                    break;
                case Kind::d_holndays:
                    if (!have_dept_r) {
                        dept_restricted = holiday_windows(quote.departure_date,
                                                          calendar,
                                                          spec.holiday_window,
                                                          length_filter);
                        have_dept_r = true;
                    }
                    value = dept_restricted.during;
                    break;
                case Kind::dept_named:
                    for (const auto& h : calendar.entries()) {
                        if (h.excluded || h.name != plan.holiday) continue;
                        if (quote.departure_date >= h.start_date &&
                            quote.departure_date < h.end_date()) {
                            value = 1.0;
                            break;
                        }
                    }
                    break;
                case Kind::adv_linear:
                    value = double(advance);
                    break;
                case Kind::adv_bucket: {
                    const auto& thresholds = spec.adv_bucket_thresholds;
                    size_t winner = thresholds.size();
                    for (size_t b = thresholds.size(); b-- > 0;) {
                        if (advance >= thresholds[b]) {
                            winner = b;
                            break;
                        }
                    }
                    value = winner == plan.bucket ? 1.0 : 0.0;
                    break;
                }
                case Kind::nstop:
                    value = quote.stops == 0 ? 1.0 : 0.0;
                    break;
                case Kind::usd: {
                    auto it = exogenous.usd.find(quote.quotation_date);
                    if (it == exogenous.usd.end()) {
                        keep[size_t(i)] = 0;
                        continue;
                    }
                    value = it->second;
                    break;
                }
                case Kind::conn_pax: {
                    auto it = exogenous.conn_pax.find(quote.departure_date);
                    if (it == exogenous.conn_pax.end()) {
                        keep[size_t(i)] = 0;
                        continue;
                    }
                    value = it->second;
                    break;
                }
                case Kind::nair_a_pair:
                case Kind::nair_adj_pair:
                case Kind::nair_airp_o: {
                    auto it = exogenous.airline_counts.find(
                        {quote.departure_date, quote.origin_airport,
                         quote.destination_airport});
                    if (it == exogenous.airline_counts.end()) {
                        keep[size_t(i)] = 0;
                        continue;
                    }
                    value = plan.kind == Kind::nair_a_pair     ? it->second.a_pair
                            : plan.kind == Kind::nair_adj_pair ? it->second.adj_pair
                                                               : it->second.airp_o;
                    break;
                }
                case Kind::event: {
                    const Date d = plan.event.applies_to == EventDateField::quotation
                                       ? quote.quotation_date
                                       : quote.departure_date;
                    value = plan.event.contains(d) ? 1.0 : 0.0;
                    break;
                }
            }
            row[c] = value;
        }
    }

    BuildResult result;
    result.matrix.names = spec.regressors;
    long kept = 0;
    for (long i = 0; i < n; ++i) kept += keep[size_t(i)];
    result.rows_dropped_unmatched = n - kept;
    if (kept == 0) {
        throw ValidationError("every row was dropped by exogenous joins");
    }

    result.matrix.values.resize(kept, p);
    result.observations.reserve(size_t(kept));
    long r = 0;
    for (long i = 0; i < n; ++i) {
        if (!keep[size_t(i)]) continue;
        const FareQuote& quote = quotes[size_t(i)];
        PanelObservation obs;
        obs.y = spec.depvar == DepVarTransform::log100 ? 100.0 * std::log(quote.price)
                                                       : quote.price;
        obs.x.assign(row_values.begin() + size_t(i) * size_t(p),
                     row_values.begin() + (size_t(i) + 1) * size_t(p));
        for (int c = 0; c < p; ++c) {
            result.matrix.values(r, c) = obs.x[size_t(c)];
        }
        obs.entity_key = entity_key(quote.airline, quote.origin_airport,
                                    quote.destination_airport, spec.directed_pairs);
        obs.quote_period_key = period_key(quote.quotation_date, spec.granularity);
        obs.depart_period_key = period_key(quote.departure_date, spec.granularity);
        result.observations.push_back(std::move(obs));
        ++r;
    }
    return result;
}

std::vector<std::string> known_regressors(const ModelSpec& spec,
                                          const HolidayCalendar& calendar) {
    std::vector<std::string> names = {
        "hday_qut_eve",  "hday_quote_n_of_days", "hday_qut_post",
        "hday_dept_eve", "hday_dept_n_of_days",  "hday_dept_post",
        "adv_days",      "nstop",                "usd",
        "conn_pax",      "nairlines_a_pair",     "nairlines_adj_pair",
        "nairlines_airp_o", "fin_crisis"};
    if (spec.holiday_window.holiday_length_filter) {
        const std::string n = std::to_string(*spec.holiday_window.holiday_length_filter);
        names.push_back("qholndays_" + n);
        names.push_back("dholndays_" + n);
    }
    std::set<std::string> holiday_names;
    for (const auto& h : calendar.entries()) {
        if (!h.excluded) holiday_names.insert(h.name);
    }
    for (const auto& h : holiday_names) {
        names.push_back("hday_dept_" + h);
    }
    for (int threshold : spec.adv_bucket_thresholds) {
        names.push_back(bucket_column_name(threshold));
    }
    return names;
}

}  // namespace airfare
