#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "airfare/core.hpp"

namespace airfare {

/**
 * @brief Deterministic random source: mt19937_64 plus hand-rolled uniform and
 * normal transforms, so generated bytes do not depend on the standard
 * library's distribution implementations.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform draw in [0, 1).
    double uniform();

    /// Standard normal via Box-Muller; pairs are cached.
    double normal();

    /// Uniform integer in [lo, hi], both bounds inclusive.
    long uniform_int(long lo, long hi);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/**
 * @brief Data-generating process for synthetic fare panels.
 *
 * The dependent value of each row is
 *   y = base_level + x'beta + entity effect + quote-month effect
 *       + departure-month effect + noise
 * with all effects and noise drawn iid normal, and the stored price is
 * exp(y / 100) so the default dependent-variable transform recovers y.
 *
 * Entities factor into airlines x destinations x the two origin airports the
 * sample keeps. Quotation dates fall in the first n_quote_months months from
 * start_date; departures stay within n_depart_months months.
 */
struct DGPSpec {
    /// Regressor name -> planted true coefficient. Names use the feature
    /// module's column vocabulary.
    std::map<std::string, double> coefficients;

    long n_airlines = 4;
    long n_destinations = 12;
    long n_quote_months = 12;
    long n_depart_months = 15;

    /// Absorption layout of the model spec the panel is generated for; the within
    /// variation of every planted column is verified under these dimensions.
    bool absorb_entity = true;
    bool absorb_quote_period = true;
    bool absorb_depart_period = true;

    double sigma_entity = 8.0;
    double sigma_quote_period = 4.0;
    double sigma_depart_period = 4.0;
    double sigma_noise = 10.0;

    long rows = 5000;
    std::optional<std::uint64_t> seed;  // mandatory; validate() rejects nullopt

    Date start_date{2008, 6, 1};
    /// Constant term; the default keeps prices near 500.
    double base_level = 621.46;

    /// Rows that sample selection must discard (wrong origin or international),
    /// added per 100 panel rows so the ingest stage has real work to do.
    int decoys_per_hundred = 2;

    void validate() const;

    long entity_count() const { return n_airlines * n_destinations * 2; }
};

/// Everything generate() produces: ingest-ready quotes (panel rows first,
/// decoys appended), the calendar and exogenous series the features need, a
/// ModelSpec whose regressors are exactly the planted columns, and the truth.
struct SynthOutput {
    std::vector<FareQuote> quotes;
    HolidayCalendar calendar;
    ExogenousData exogenous;
    ModelSpec spec;
    std::map<std::string, double> true_beta;
    long panel_rows = 0;
};

/**
 * @brief Draws a synthetic panel from the process. Bit-identical for equal
 * specs; every planted column is checked to have within variation after
 * demeaning and generation fails loudly when one does not.
 */
SynthOutput generate(const DGPSpec& dgp);

/// Fixed synthetic holiday calendar covering [first_year, last_year]: per year
/// two 3-day holidays, one 1-day and one 2-day holiday.
HolidayCalendar synthetic_calendar(int first_year, int last_year);

}  // namespace airfare
