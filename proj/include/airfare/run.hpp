#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "airfare/core.hpp"
#include "airfare/report.hpp"
#include "airfare/synthgen.hpp"

namespace airfare {

/**
 * @brief File-driven configuration for the pipeline commands. One config can
 * carry a whole batch of model specs; each spec becomes a column group in the
 * rendered table.
 *
 * The ingest command reads `quotes_path` and writes the selected sample to
 * `selected_path`; the fit command reads `selected_path`. Leaving
 * `selected_path` empty resolves it to "<output_dir>/selected.csv".
 */
struct RunConfig {
    std::string quotes_path;
    std::string selected_path;
    std::string calendar_path;
    std::string usd_path;
    std::string conn_pax_path;
    std::string nairlines_path;
    std::string events_path;
    std::string output_dir = ".";

    std::vector<ModelSpec> specs;
    /// Origin airports sample selection keeps; empty keeps every origin.
    std::vector<std::string> keep_origins = {"CGH", "GRU"};

    DGPSpec dgp;

    TableFormat format = TableFormat::text;
    bool robust_se = false;
    double demean_tol = 1e-8;

    std::string resolved_selected_path() const;

    static RunConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    /// Reads and parses a config file. IoError when unreadable, ParseError on
    /// malformed JSON.
    static RunConfig load(const std::string& path);
};

void to_json(nlohmann::json& j, const DGPSpec& d);
void from_json(const nlohmann::json& j, DGPSpec& d);

/// Holiday calendar file: JSON array of {name, start_date, length_days,
/// excluded} objects.
HolidayCalendar load_calendar(const std::string& path);
void write_calendar(const HolidayCalendar& calendar, const std::string& path);

/// Loads whichever exogenous series the config names; empty paths are
/// skipped. Formats: usd.csv "date,usd"; conn_pax.csv "date,conn_pax";
/// nairlines.csv "date,origin,destination,a_pair,adj_pair,airp_o";
/// events.json = JSON array of event ranges.
ExogenousData load_exogenous(const RunConfig& config);
void write_exogenous(const ExogenousData& exogenous, const RunConfig& config);

/// Pipeline commands. Progress and diagnostics go to `log` (the CLI passes
/// stderr); results land in files under the config's output_dir. The return
/// value is the process exit code.
int run_ingest(const RunConfig& config, std::ostream& log);
int run_fit(const RunConfig& config, std::ostream& log);
int run_synth(const RunConfig& config, std::ostream& log);
int run_check(const RunConfig& config, std::ostream& log);

/// Stage-distinct exit code for a pipeline error.
int exit_code_for(const Error& error);

}  // namespace airfare
