#include "airfare/core.hpp"

#include <algorithm>

namespace airfare {

void FareQuote::validate() const {
    if (airline.empty() || origin_airport.empty() || destination_airport.empty()) {
        throw ValidationError("fare quote has an empty identifier field");
    }
    if (departure_date < quotation_date) {
        throw ValidationError("departure " + departure_date.to_string() +
                              " precedes quotation " + quotation_date.to_string());
    }
    if (!(price > 0.0)) {
        throw ValidationError("price must be positive, got " + std::to_string(price));
    }
    if (stops < 0) {
        throw ValidationError("stops must be non-negative, got " + std::to_string(stops));
    }
}

void HolidayCalendar::add(HolidaySpec spec) {
    if (spec.name.empty()) {
        throw ValidationError("holiday name must be non-empty");
    }
    if (spec.length_days < 1) {
        throw ValidationError("holiday '" + spec.name + "' has length_days < 1");
    }
    for (const auto& existing : entries_) {
        if (existing.name == spec.name &&
            existing.start_date.year() == spec.start_date.year()) {
            throw ValidationError("duplicate holiday '" + spec.name + "' in year " +
                                  std::to_string(spec.start_date.year()));
        }
    }
    entries_.push_back(std::move(spec));
}

bool HolidayCalendar::covers(Date date) const {
    if (entries_.empty()) return false;
    int lo = entries_.front().start_date.year();
    int hi = lo;
    for (const auto& e : entries_) {
        lo = std::min(lo, e.start_date.year());
        hi = std::max(hi, e.start_date.year());
    }
    return date.year() >= lo && date.year() <= hi;
}

void ExogenousData::validate() const {
    for (const auto& [date, rate] : usd) {
        if (!(rate > 0.0)) {
            throw ValidationError("usd rate on " + date.to_string() +
                                  " must be positive");
        }
    }
    for (const auto& [date, pax] : conn_pax) {
        if (pax < 0.0) {
            throw ValidationError("conn_pax on " + date.to_string() + " is negative");
        }
    }
    for (const auto& [key, counts] : airline_counts) {
        if (counts.a_pair < 0 || counts.adj_pair < 0 || counts.airp_o < 0) {
            throw ValidationError("airline counts on " + std::get<0>(key).to_string() +
                                  " contain a negative value");
        }
    }
    for (const auto& event : events) {
        if (event.name.empty()) {
            throw ValidationError("event range with empty name");
        }
        if (event.end && *event.end < event.start) {
            throw ValidationError("event '" + event.name + "' has end before start");
        }
    }
}

const EventRange* ExogenousData::find_event(const std::string& name) const {
    for (const auto& event : events) {
        if (event.name == name) return &event;
    }
    return nullptr;
}

TimeGranularity parse_granularity(const std::string& text) {
    if (text == "day") return TimeGranularity::day;
    if (text == "month") return TimeGranularity::month;
    throw ValidationError("granularity must be 'day' or 'month', got '" + text + "'");
}

DepVarTransform parse_depvar(const std::string& text) {
    if (text == "raw") return DepVarTransform::raw;
    if (text == "log100") return DepVarTransform::log100;
    throw ValidationError("depvar must be 'raw' or 'log100', got '" + text + "'");
}

const char* to_string(TimeGranularity g) {
    return g == TimeGranularity::day ? "day" : "month";
}

const char* to_string(DepVarTransform t) {
    return t == DepVarTransform::raw ? "raw" : "log100";
}

void HolidayWindowConfig::validate() const {
    if (eve_days < 1) throw ValidationError("eve_days must be >= 1");
    if (post_days < 1) throw ValidationError("post_days must be >= 1");
    if (holiday_length_filter && *holiday_length_filter < 1) {
        throw ValidationError("holiday_length_filter must be >= 1 when set");
    }
}

void ModelSpec::validate() const {
    if (regressors.empty()) {
        throw ValidationError("model spec has no regressors");
    }
    std::vector<std::string> sorted = regressors;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw ValidationError("model spec lists a regressor twice");
    }
    if (fe_dimension_count() == 0) {
        throw ValidationError("at least one fixed-effect dimension is required");
    }
    if (stops_filter < -1) {
        throw ValidationError("stops_filter must be -1 (any) or a stop count");
    }
    if (adv_bucket_thresholds.empty()) {
        throw ValidationError("adv_bucket_thresholds must not be empty");
    }
    for (size_t i = 0; i < adv_bucket_thresholds.size(); ++i) {
        if (adv_bucket_thresholds[i] < 0) {
            throw ValidationError("adv bucket thresholds must be non-negative");
        }
        if (i > 0 && adv_bucket_thresholds[i] <= adv_bucket_thresholds[i - 1]) {
            throw ValidationError("adv bucket thresholds must be strictly increasing");
        }
    }
    holiday_window.validate();
}

const CoefficientStat* FitResult::find(const std::string& name) const {
    for (const auto& c : coefficients) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

std::string significance_stars(double p_value) {
    if (p_value < 0.001) return "***";
    if (p_value < 0.01) return "**";
    if (p_value < 0.05) return "*";
    return "";
}

namespace {

void check_key_field(const std::string& value, const char* what) {
    if (value.empty()) {
        throw ValidationError(std::string(what) + " must be non-empty");
    }
    if (value.find('|') != std::string::npos) {
        throw ValidationError(std::string(what) + " must not contain '|': '" + value +
                              "'");
    }
}

}  // namespace

std::string entity_key(const std::string& airline, const std::string& origin,
                       const std::string& destination, bool directed) {
    check_key_field(airline, "airline");
    check_key_field(origin, "origin airport");
    check_key_field(destination, "destination airport");
    if (directed || origin <= destination) {
        return airline + "|" + origin + "|" + destination;
    }
    return airline + "|" + destination + "|" + origin;
}

std::string period_key(Date date, TimeGranularity granularity) {
    return granularity == TimeGranularity::month ? date.month_string()
                                                 : date.to_string();
}

}  // namespace airfare
