#include "airfare/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "airfare/demean.hpp"
#include "airfare/features.hpp"

namespace airfare {

double Rng::uniform() {
    // Top 53 bits of the engine output give a dyadic rational in [0, 1).
    return double(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

long Rng::uniform_int(long lo, long hi) {
    if (hi < lo) {
        throw ValidationError("uniform_int: empty range");
    }
    const std::uint64_t range = std::uint64_t(hi - lo) + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t draw = engine_();
    while (draw >= limit) {
        draw = engine_();
    }
    return lo + long(draw % range);
}

void DGPSpec::validate() const {
    if (!seed) {
        throw ValidationError("DGPSpec: seed is mandatory");
    }
    if (coefficients.empty()) {
        throw ValidationError("DGPSpec: at least one planted coefficient");
    }
    if (sigma_entity < 0 || sigma_quote_period < 0 || sigma_depart_period < 0 ||
        sigma_noise < 0) {
        throw ValidationError("DGPSpec: negative standard deviation");
    }
    if (rows < 10 * long(coefficients.size())) {
        throw ValidationError("DGPSpec: rows must be >= 10x coefficient count");
    }
    if (n_airlines < 1 || n_airlines > 26) {
        throw ValidationError("DGPSpec: n_airlines out of [1, 26]");
    }
    if (n_destinations < 1 || n_destinations > 676) {
        throw ValidationError("DGPSpec: n_destinations out of [1, 676]");
    }
    if (n_quote_months < 1) {
        throw ValidationError("DGPSpec: n_quote_months must be >= 1");
    }
    // Advance purchases reach 75 days, so departures need three extra months.
    if (n_depart_months < n_quote_months + 3) {
        throw ValidationError("DGPSpec: n_depart_months must be >= n_quote_months + 3");
    }
    if (decoys_per_hundred < 0) {
        throw ValidationError("DGPSpec: negative decoy rate");
    }
}

HolidayCalendar synthetic_calendar(int first_year, int last_year) {
    HolidayCalendar calendar;
    for (int year = first_year; year <= last_year; ++year) {
        calendar.add({"festa", Date(year, 5, 20), 3, false});
        calendar.add({"ponte", Date(year, 8, 5), 1, false});
        calendar.add({"clara", Date(year, 11, 11), 3, false});
        calendar.add({"virada", Date(year, 12, 29), 2, false});
    }
    return calendar;
}

namespace {

Date month_start(int month_index) {
    return Date(month_index / 12, unsigned(month_index % 12 + 1), 1);
}

std::string airline_code(long i) {
    return {char('A'), char('A' + i)};
}

std::string destination_code(long i) {
    return {char('D'), char('A' + i / 26), char('A' + i % 26)};
}

// Mirrors the feature module's name resolution: true when the name maps to a
// built-in column family, false when it needs an event range.
bool is_family_name(const std::string& name) {
    static const std::set<std::string> exact = {
        "hday_qut_eve",  "hday_quote_n_of_days", "hday_qut_post",
        "hday_dept_eve", "hday_dept_n_of_days",  "hday_dept_post",
        "adv_days",      "nstop",                "usd",
        "conn_pax",      "nairlines_a_pair",     "nairlines_adj_pair",
        "nairlines_airp_o", "fin_crisis"};
    if (exact.count(name)) {
        return true;
    }
    for (const char* prefix : {"qholndays_", "dholndays_", "adv_days_", "hday_dept_"}) {
        if (name.rfind(prefix, 0) == 0) {
            return true;
        }
    }
    return false;
}

}  // namespace

SynthOutput generate(const DGPSpec& dgp) {
    dgp.validate();
    Rng rng(*dgp.seed);

    const int first_month = Date(dgp.start_date.year(), dgp.start_date.month(), 1)
                                .month_index();
    const long quote_months = dgp.n_quote_months;
    const long depart_months = dgp.n_depart_months;
    const Date gen_start = month_start(first_month);
    const Date depart_end = month_start(first_month + int(depart_months));
    const int last_year = month_start(first_month + int(depart_months) - 1).year();

    SynthOutput out;
    out.calendar = synthetic_calendar(gen_start.year(), last_year);
    out.true_beta = dgp.coefficients;

    out.spec.label = "price";
    out.spec.absorb_entity = dgp.absorb_entity;
    out.spec.absorb_quote_period = dgp.absorb_quote_period;
    out.spec.absorb_depart_period = dgp.absorb_depart_period;
    for (const auto& [name, value] : dgp.coefficients) {
        (void)value;
        out.spec.regressors.push_back(name);
    }
    out.spec.validate();

    const bool wants_airline_counts =
        std::any_of(out.spec.regressors.begin(), out.spec.regressors.end(),
                    [](const std::string& n) { return n.rfind("nairlines_", 0) == 0; });

    // Exogenous series over the full date span, drawn in a fixed order.
    double usd_level = 1.75;
    for (Date d = gen_start; d < depart_end; d = d + 1) {
        out.exogenous.usd[d] = usd_level;
        usd_level += 0.01 * rng.normal();
        if (usd_level < 0.5) {
            usd_level = 0.5;
        }
    }
    for (Date d = gen_start; d < depart_end; d = d + 1) {
        double pax = 5000.0 + 400.0 * rng.normal();
        out.exogenous.conn_pax[d] = pax < 100.0 ? 100.0 : pax;
    }
    if (wants_airline_counts) {
        for (Date d = gen_start; d < depart_end; d = d + 1) {
            for (const char* origin : {"CGH", "GRU"}) {
                for (long j = 0; j < dgp.n_destinations; ++j) {
                    AirlineCounts counts;
                    counts.a_pair = double(rng.uniform_int(1, dgp.n_airlines));
                    counts.adj_pair = double(rng.uniform_int(1, dgp.n_airlines + 2));
                    counts.airp_o = double(rng.uniform_int(2, dgp.n_airlines + 4));
                    out.exogenous.airline_counts[{d, origin, destination_code(j)}] =
                        counts;
                }
            }
        }
    }
    const long span_days = depart_end - gen_start;
    for (const auto& name : out.spec.regressors) {
        if (!is_family_name(name)) {
            EventRange range;
            range.name = name;
            range.start = gen_start + int(span_days / 3);
            range.end = gen_start + int(2 * span_days / 3);
            range.applies_to = EventDateField::quotation;
            out.exogenous.events.push_back(range);
        }
    }

    const long entities = dgp.entity_count();
    std::vector<double> lambda(static_cast<size_t>(entities));
    for (auto& v : lambda) {
        v = dgp.sigma_entity * rng.normal();
    }
    std::vector<double> mu_quote(static_cast<size_t>(quote_months));
    for (auto& v : mu_quote) {
        v = dgp.sigma_quote_period * rng.normal();
    }
    std::vector<double> mu_depart(static_cast<size_t>(depart_months));
    for (auto& v : mu_depart) {
        v = dgp.sigma_depart_period * rng.normal();
    }

    // Advance-purchase ladder: hits the baseline, every bucket, and beyond the
    // largest threshold.
    static const int kAdvLadder[] = {1, 2, 3, 4, 5, 6, 7,  8, 10,
                                     15, 20, 30, 40, 45, 50, 60, 75};
    const long ladder_size = long(std::size(kAdvLadder));

    std::vector<FareQuote> panel;
    panel.reserve(size_t(dgp.rows));
    std::vector<long> row_entity, row_quote_month, row_depart_month;
    row_entity.reserve(size_t(dgp.rows));
    row_quote_month.reserve(size_t(dgp.rows));
    row_depart_month.reserve(size_t(dgp.rows));

    std::set<std::tuple<std::string, std::string, std::string, Date, Date>> used;
    long attempts = 0;
    const long attempt_budget = 50 * dgp.rows + 1000;
    while (long(panel.size()) < dgp.rows) {
        if (++attempts > attempt_budget) {
            throw ValidationError(
                "DGPSpec infeasible: cannot place the requested rows with "
                "distinct (airline, route, dates) keys");
        }
        const long e = rng.uniform_int(0, entities - 1);
        const long airline_i = e % dgp.n_airlines;
        const long rest = e / dgp.n_airlines;
        const long dest_i = rest % dgp.n_destinations;
        const char* origin = (rest / dgp.n_destinations == 0) ? "CGH" : "GRU";

        long quote_m = rng.uniform_int(0, quote_months - 1);
        Date qdate = month_start(first_month + int(quote_m)) +
                     int(rng.uniform_int(0, 27));
        const int adv = kAdvLadder[rng.uniform_int(0, ladder_size - 1)];
        Date ddate = qdate + adv;

        const int stops = int(rng.uniform_int(0, 2));

        if (rng.uniform() < 0.15) {
            // Snap the departure onto a holiday window so window regressors
            // attain 1 by construction, not by luck.
            const auto& entries = out.calendar.entries();
            const auto& entry = entries[size_t(
                rng.uniform_int(0, long(entries.size()) - 1))];
            const int eve = out.spec.holiday_window.eve_days;
            const int post = out.spec.holiday_window.post_days;
            const int offset = int(rng.uniform_int(-eve, entry.length_days + post - 1));
            const Date cand_d = entry.start_date + offset;
            const Date cand_q = cand_d - adv;
            if (cand_q >= gen_start && cand_d < depart_end &&
                cand_q.month_index() < first_month + quote_months) {
                qdate = cand_q;
                ddate = cand_d;
                quote_m = qdate.month_index() - first_month;
            }
        }

        const long depart_m = ddate.month_index() - first_month;
        if (depart_m < 0 || depart_m >= depart_months) {
            continue;
        }

        FareQuote quote;
        quote.airline = airline_code(airline_i);
        quote.origin_airport = origin;
        quote.destination_airport = destination_code(dest_i);
        quote.quotation_date = qdate;
        quote.departure_date = ddate;
        quote.stops = stops;
        quote.price = 1.0;  // placeholder until y is drawn
        quote.is_domestic = true;

        auto key = std::make_tuple(quote.airline, quote.origin_airport,
                                   quote.destination_airport, qdate, ddate);
        if (!used.insert(std::move(key)).second) {
            continue;
        }
        panel.push_back(std::move(quote));
        row_entity.push_back(e);
        row_quote_month.push_back(quote_m);
        row_depart_month.push_back(depart_m);
    }

    BuildResult built = build_features(panel, out.calendar, out.exogenous, out.spec);
    if (built.rows_dropped_unmatched != 0 ||
        long(built.observations.size()) != dgp.rows) {
        throw ValidationError("generated rows failed their exogenous joins");
    }

    std::vector<double> beta;
    beta.reserve(out.spec.regressors.size());
    for (const auto& name : out.spec.regressors) {
        beta.push_back(dgp.coefficients.at(name));
    }

    for (long i = 0; i < dgp.rows; ++i) {
        double y = dgp.base_level;
        for (size_t j = 0; j < beta.size(); ++j) {
            y += beta[j] * built.matrix.values(i, Eigen::Index(j));
        }
        y += lambda[size_t(row_entity[size_t(i)])];
        y += mu_quote[size_t(row_quote_month[size_t(i)])];
        y += mu_depart[size_t(row_depart_month[size_t(i)])];
        y += dgp.sigma_noise * rng.normal();
        panel[size_t(i)].price = std::exp(y / 100.0);
    }

    // Every planted column must keep variation once the fixed effects are
    // projected out, or the panel cannot identify its coefficient.
    {
        Eigen::MatrixXd centered = built.matrix.values;
        FEGroups groups = FEGroups::from_observations(
            built.observations, out.spec.absorb_entity,
            out.spec.absorb_quote_period, out.spec.absorb_depart_period);
        demean_matrix(centered, groups);
        for (Eigen::Index c = 0; c < centered.cols(); ++c) {
            if (centered.col(c).cwiseAbs().maxCoeff() < 1e-9) {
                throw ValidationError("planted column '" +
                                      built.matrix.names[size_t(c)] +
                                      "' has no within variation after demeaning");
            }
        }
    }

    out.quotes = panel;
    const long decoys = dgp.rows * dgp.decoys_per_hundred / 100;
    for (long k = 0; k < decoys; ++k) {
        FareQuote decoy = panel[size_t((k * 97) % dgp.rows)];
        if (k % 2 == 0) {
            decoy.airline = "ZZI";
            decoy.is_domestic = false;
        } else {
            decoy.origin_airport = "VCP";
        }
        decoy.price = 80.0 + double(k);
        out.quotes.push_back(std::move(decoy));
    }
    out.panel_rows = dgp.rows;
    return out;
}

}  // namespace airfare
