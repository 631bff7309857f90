#include "airfare/run.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "airfare/demean.hpp"
#include "airfare/estimator.hpp"
#include "airfare/features.hpp"
#include "airfare/ingest.hpp"

namespace fs = std::filesystem;

namespace airfare {

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << content;
    if (!out) {
        throw IoError("write to '" + path + "' failed");
    }
}

// Shortest decimal form that parses back to the same double.
std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        throw RenderError("number formatting failed");
    }
    return std::string(buf, ptr);
}

double parse_double_field(const std::string& text, const std::string& where) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw ParseError(where + ": bad number '" + text + "'");
    }
    return value;
}

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::string current;
    for (char ch : line) {
        if (ch == delimiter) {
            fields.push_back(current);
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    fields.push_back(current);
    return fields;
}

nlohmann::json parse_json_file(const std::string& path) {
    const std::string text = read_text_file(path);
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        throw ParseError("'" + path + "' is not valid JSON");
    }
    return j;
}

void ensure_output_dir(const RunConfig& config) {
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + config.output_dir + "'");
    }
}

const char* table_extension(TableFormat format) {
    switch (format) {
        case TableFormat::text: return "txt";
        case TableFormat::delim: return "tsv";
        case TableFormat::markup: return "md";
    }
    return "txt";
}

}  // namespace

void to_json(nlohmann::json& j, const DGPSpec& d) {
    j = {{"coefficients", d.coefficients},
         {"n_airlines", d.n_airlines},
         {"n_destinations", d.n_destinations},
         {"n_quote_months", d.n_quote_months},
         {"n_depart_months", d.n_depart_months},
         {"absorb_entity", d.absorb_entity},
         {"absorb_quote_period", d.absorb_quote_period},
         {"absorb_depart_period", d.absorb_depart_period},
         {"sigma_entity", d.sigma_entity},
         {"sigma_quote_period", d.sigma_quote_period},
         {"sigma_depart_period", d.sigma_depart_period},
         {"sigma_noise", d.sigma_noise},
         {"rows", d.rows},
         {"start_date", d.start_date},
         {"base_level", d.base_level},
         {"decoys_per_hundred", d.decoys_per_hundred}};
    if (d.seed) {
        j["seed"] = *d.seed;
    } else {
        j["seed"] = nullptr;
    }
}

void from_json(const nlohmann::json& j, DGPSpec& d) {
    d = DGPSpec{};
    d.coefficients = j.value("coefficients", d.coefficients);
    d.n_airlines = j.value("n_airlines", d.n_airlines);
    d.n_destinations = j.value("n_destinations", d.n_destinations);
    d.n_quote_months = j.value("n_quote_months", d.n_quote_months);
    d.n_depart_months = j.value("n_depart_months", d.n_depart_months);
    d.absorb_entity = j.value("absorb_entity", d.absorb_entity);
    d.absorb_quote_period = j.value("absorb_quote_period", d.absorb_quote_period);
    d.absorb_depart_period = j.value("absorb_depart_period", d.absorb_depart_period);
    d.sigma_entity = j.value("sigma_entity", d.sigma_entity);
    d.sigma_quote_period = j.value("sigma_quote_period", d.sigma_quote_period);
    d.sigma_depart_period = j.value("sigma_depart_period", d.sigma_depart_period);
    d.sigma_noise = j.value("sigma_noise", d.sigma_noise);
    d.rows = j.value("rows", d.rows);
    if (j.contains("seed") && !j.at("seed").is_null()) {
        d.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("start_date")) {
        d.start_date = j.at("start_date").get<Date>();
    }
    d.base_level = j.value("base_level", d.base_level);
    d.decoys_per_hundred = j.value("decoys_per_hundred", d.decoys_per_hundred);
}

std::string RunConfig::resolved_selected_path() const {
    return selected_path.empty() ? join_path(output_dir, "selected.csv")
                                 : selected_path;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig config;
    if (j.contains("paths")) {
        const auto& p = j.at("paths");
        config.quotes_path = p.value("quotes", std::string());
        config.selected_path = p.value("selected", std::string());
        config.calendar_path = p.value("calendar", std::string());
        config.usd_path = p.value("usd", std::string());
        config.conn_pax_path = p.value("conn_pax", std::string());
        config.nairlines_path = p.value("nairlines", std::string());
        config.events_path = p.value("events", std::string());
        config.output_dir = p.value("output_dir", config.output_dir);
    }
    config.specs = j.value("specs", std::vector<ModelSpec>{});
    config.keep_origins = j.value("keep_origins", config.keep_origins);
    if (j.contains("dgp")) {
        config.dgp = j.at("dgp").get<DGPSpec>();
    }
    config.format = parse_format(j.value("format", std::string("text")));
    config.robust_se = j.value("robust_se", false);
    config.demean_tol = j.value("demean_tol", config.demean_tol);
    if (config.demean_tol < 0) {
        throw ValidationError("config: demean_tol must be >= 0");
    }
    return config;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["paths"] = {{"quotes", quotes_path},     {"selected", selected_path},
                  {"calendar", calendar_path}, {"usd", usd_path},
                  {"conn_pax", conn_pax_path}, {"nairlines", nairlines_path},
                  {"events", events_path},     {"output_dir", output_dir}};
    j["specs"] = specs;
    j["keep_origins"] = keep_origins;
    j["dgp"] = dgp;
    j["format"] = std::string(airfare::to_string(format));
    j["robust_se"] = robust_se;
    j["demean_tol"] = demean_tol;
    return j;
}

RunConfig RunConfig::load(const std::string& path) {
    return from_json(parse_json_file(path));
}

HolidayCalendar load_calendar(const std::string& path) {
    const nlohmann::json j = parse_json_file(path);
    if (!j.is_array()) {
        throw ParseError("calendar file '" + path + "' must be a JSON array");
    }
    HolidayCalendar calendar;
    for (const auto& entry : j) {
        calendar.add(entry.get<HolidaySpec>());
    }
    return calendar;
}

void write_calendar(const HolidayCalendar& calendar, const std::string& path) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& entry : calendar.entries()) {
        j.push_back(entry);
    }
    write_text_file(path, j.dump(2) + "\n");
}

namespace {

// "date,<value>" two-column series.
std::map<Date, double> load_date_series(const std::string& path,
                                        const std::string& column) {
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("'" + path + "': empty file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (split_line(line, ',') != std::vector<std::string>{"date", column}) {
        throw ParseError("'" + path + "': header must be 'date," + column + "'");
    }
    std::map<Date, double> series;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_line(line, ',');
        if (fields.size() != 2) {
            throw ParseError("'" + path + "' line " + std::to_string(line_no) +
                             ": expected 2 fields");
        }
        const Date d = Date::parse(fields[0]);
        series[d] = parse_double_field(fields[1], "'" + path + "' line " +
                                                     std::to_string(line_no));
    }
    return series;
}

void write_date_series(const std::map<Date, double>& series,
                       const std::string& column, const std::string& path) {
    std::string out = "date," + column + "\n";
    for (const auto& [date, value] : series) {
        out += date.to_string() + "," + format_double(value) + "\n";
    }
    write_text_file(path, out);
}

}  // namespace

ExogenousData load_exogenous(const RunConfig& config) {
    ExogenousData exogenous;
    if (!config.usd_path.empty()) {
        exogenous.usd = load_date_series(config.usd_path, "usd");
    }
    if (!config.conn_pax_path.empty()) {
        exogenous.conn_pax = load_date_series(config.conn_pax_path, "conn_pax");
    }
    if (!config.nairlines_path.empty()) {
        const std::string text = read_text_file(config.nairlines_path);
        std::istringstream in(text);
        std::string line;
        const std::vector<std::string> expected = {
            "date",      "origin",   "destination",
            "nairlines_a_pair", "nairlines_adj_pair", "nairlines_airp_o"};
        if (!std::getline(in, line)) {
            throw ParseError("'" + config.nairlines_path + "': empty file");
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (split_line(line, ',') != expected) {
            throw ParseError("'" + config.nairlines_path +
                             "': header must be date,origin,destination,"
                             "nairlines_a_pair,nairlines_adj_pair,nairlines_airp_o");
        }
        long line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            const auto fields = split_line(line, ',');
            if (fields.size() != 6) {
                throw ParseError("'" + config.nairlines_path + "' line " +
                                 std::to_string(line_no) + ": expected 6 fields");
            }
            const std::string where =
                "'" + config.nairlines_path + "' line " + std::to_string(line_no);
            AirlineCounts counts;
            counts.a_pair = parse_double_field(fields[3], where);
            counts.adj_pair = parse_double_field(fields[4], where);
            counts.airp_o = parse_double_field(fields[5], where);
            exogenous.airline_counts[{Date::parse(fields[0]), fields[1],
                                      fields[2]}] = counts;
        }
    }
    if (!config.events_path.empty()) {
        const nlohmann::json j = parse_json_file(config.events_path);
        if (!j.is_array()) {
            throw ParseError("events file '" + config.events_path +
                             "' must be a JSON array");
        }
        for (const auto& entry : j) {
            exogenous.events.push_back(entry.get<EventRange>());
        }
    }
    exogenous.validate();
    return exogenous;
}

void write_exogenous(const ExogenousData& exogenous, const RunConfig& config) {
    if (!config.usd_path.empty() && !exogenous.usd.empty()) {
        write_date_series(exogenous.usd, "usd", config.usd_path);
    }
    if (!config.conn_pax_path.empty() && !exogenous.conn_pax.empty()) {
        write_date_series(exogenous.conn_pax, "conn_pax", config.conn_pax_path);
    }
    if (!config.nairlines_path.empty() && !exogenous.airline_counts.empty()) {
        std::string out =
            "date,origin,destination,nairlines_a_pair,nairlines_adj_pair,"
            "nairlines_airp_o\n";
        for (const auto& [key, counts] : exogenous.airline_counts) {
            out += std::get<0>(key).to_string() + "," + std::get<1>(key) + "," +
                   std::get<2>(key) + "," + format_double(counts.a_pair) + "," +
                   format_double(counts.adj_pair) + "," +
                   format_double(counts.airp_o) + "\n";
        }
        write_text_file(config.nairlines_path, out);
    }
    if (!config.events_path.empty() && !exogenous.events.empty()) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& event : exogenous.events) {
            j.push_back(event);
        }
        write_text_file(config.events_path, j.dump(2) + "\n");
    }
}

int run_ingest(const RunConfig& config, std::ostream& log) {
    if (config.quotes_path.empty()) {
        throw ValidationError("config: paths.quotes is required for ingest");
    }
    ensure_output_dir(config);
    ParseOutcome outcome = parse_quotes_file(config.quotes_path);
    if (!outcome.row_errors.empty()) {
        log << outcome.row_errors.size() << " rows rejected:\n";
        size_t shown = 0;
        for (const auto& error : outcome.row_errors) {
            if (++shown > 10) {
                log << "  ...\n";
                break;
            }
            log << "  line " << error.line << ": " << error.message << "\n";
        }
    }
    if (outcome.quotes.empty()) {
        throw ValidationError("'" + config.quotes_path + "': no usable rows");
    }

    auto [selected, report] = select_sample(outcome, config.keep_origins);
    write_quotes_file(config.resolved_selected_path(), selected);
    write_text_file(join_path(config.output_dir, "selection_report.txt"),
                    report.to_text());
    log << report.to_text();
    log << "selected sample written to " << config.resolved_selected_path() << "\n";
    return 0;
}

int run_fit(const RunConfig& config, std::ostream& log) {
    if (config.specs.empty()) {
        throw ValidationError("config: at least one model spec is required for fit");
    }
    ensure_output_dir(config);
    const std::string sample_path = config.resolved_selected_path();
    ParseOutcome outcome = parse_quotes_file(sample_path);
    if (!outcome.row_errors.empty()) {
        log << "warning: " << outcome.row_errors.size() << " rows rejected from '"
            << sample_path << "'\n";
    }
    if (outcome.quotes.empty()) {
        throw ValidationError("'" + sample_path + "': no usable rows");
    }

    HolidayCalendar calendar;
    if (!config.calendar_path.empty()) {
        calendar = load_calendar(config.calendar_path);
    }
    ExogenousData exogenous = load_exogenous(config);

    FitOptions options;
    options.inference.robust = config.robust_se;
    options.demean.tol = config.demean_tol;

    std::vector<FitResult> fits;
    std::vector<std::string> labels;
    nlohmann::json records = nlohmann::json::array();
    for (const auto& spec : config.specs) {
        FitResult result = fit(outcome.quotes, calendar, exogenous, spec, options);
        log << "fit '" << spec.label << "': n=" << result.n_obs
            << " df=" << result.df_residual << " adj R2=" << format_3d(result.adj_r2)
            << "\n";
        records.push_back(export_results(result, spec));
        fits.push_back(std::move(result));
        labels.push_back(spec.label);
    }

    const TableLayout layout = default_layout(fits, labels);
    const std::string table = render_table(fits, layout, config.format);
    const std::string table_path = join_path(
        config.output_dir, std::string("table.") + table_extension(config.format));
    write_text_file(table_path, table);
    write_text_file(join_path(config.output_dir, "results.json"),
                    records.dump(2) + "\n");
    log << table;
    log << "table written to " << table_path << "\n";
    return 0;
}

int run_synth(const RunConfig& config, std::ostream& log) {
    ensure_output_dir(config);
    SynthOutput out = generate(config.dgp);

    RunConfig pipeline = config;
    pipeline.quotes_path = join_path(config.output_dir, "synthetic_quotes.csv");
    pipeline.selected_path = join_path(config.output_dir, "selected.csv");
    pipeline.calendar_path = join_path(config.output_dir, "synthetic_calendar.json");
    pipeline.usd_path = join_path(config.output_dir, "usd.csv");
    pipeline.conn_pax_path = join_path(config.output_dir, "conn_pax.csv");
    pipeline.nairlines_path = out.exogenous.airline_counts.empty()
                                  ? std::string()
                                  : join_path(config.output_dir, "nairlines.csv");
    pipeline.events_path = out.exogenous.events.empty()
                               ? std::string()
                               : join_path(config.output_dir, "events.json");
    pipeline.specs = {out.spec};

    write_quotes_file(pipeline.quotes_path, out.quotes);
    write_calendar(out.calendar, pipeline.calendar_path);
    write_exogenous(out.exogenous, pipeline);

    nlohmann::json truth = {{"true_beta", out.true_beta},
                            {"spec", out.spec},
                            {"panel_rows", out.panel_rows},
                            {"base_level", config.dgp.base_level}};
    write_text_file(join_path(config.output_dir, "truth.json"), truth.dump(2) + "\n");
    write_text_file(join_path(config.output_dir, "synthetic_config.json"),
                    pipeline.to_json().dump(2) + "\n");

    log << "synthetic panel: " << out.panel_rows << " rows (+"
        << (out.quotes.size() - size_t(out.panel_rows)) << " decoys) -> "
        << pipeline.quotes_path << "\n";
    log << "pipeline config written to "
        << join_path(config.output_dir, "synthetic_config.json") << "\n";
    return 0;
}

namespace {

struct CheckLine {
    std::string name;
    bool pass = false;
    std::string detail;
    Stage fail_stage = Stage::validate;
};

struct CheckFixture {
    std::vector<PanelObservation> observations;
    std::vector<std::string> names;
    ModelSpec spec;
    Eigen::VectorXd y;
    Eigen::MatrixXd x;
};

CheckFixture make_fixture(std::uint64_t seed, bool absorb_quote, bool absorb_depart) {
    DGPSpec dgp;
    dgp.coefficients = {{"adv_days", -0.3}, {"nstop", -25.0}, {"hday_dept_eve", 10.0}};
    dgp.n_airlines = 3;
    dgp.n_destinations = 4;
    dgp.n_quote_months = 3;
    dgp.n_depart_months = 6;
    dgp.rows = 400;
    dgp.sigma_entity = 6.0;
    dgp.sigma_quote_period = 3.0;
    dgp.sigma_depart_period = 3.0;
    dgp.sigma_noise = 8.0;
    dgp.seed = seed;
    dgp.decoys_per_hundred = 0;

    SynthOutput out = generate(dgp);
    CheckFixture fixture;
    fixture.spec = out.spec;
    fixture.spec.absorb_quote_period = absorb_quote;
    fixture.spec.absorb_depart_period = absorb_depart;

    BuildResult built =
        build_features(out.quotes, out.calendar, out.exogenous, out.spec);
    fixture.observations = std::move(built.observations);
    fixture.names = built.matrix.names;
    fixture.x = std::move(built.matrix.values);
    const long n = long(fixture.observations.size());
    fixture.y.resize(n);
    for (long i = 0; i < n; ++i) {
        fixture.y[i] = fixture.observations[size_t(i)].y;
    }
    return fixture;
}

CheckLine check_oracle_equivalence(const std::string& name, std::uint64_t seed,
                                   bool absorb_quote, bool absorb_depart,
                                   const DemeanOptions& demean_options) {
    CheckLine line{name, false, "", Stage::validate};
    CheckFixture fixture = make_fixture(seed, absorb_quote, absorb_depart);

    FitOptions options;
    options.demean = demean_options;
    FitResult result =
        fit_observations(fixture.observations, fixture.names, fixture.spec, options);

    FEGroups groups = FEGroups::from_observations(
        fixture.observations, fixture.spec.absorb_entity,
        fixture.spec.absorb_quote_period, fixture.spec.absorb_depart_period);
    LsdvResult oracle = lsdv_oracle(fixture.y, fixture.x, groups);

    double worst = 0.0;
    for (size_t j = 0; j < fixture.names.size(); ++j) {
        const CoefficientStat* stat = result.find(fixture.names[j]);
        if (!stat) {
            line.detail = "column '" + fixture.names[j] + "' was dropped";
            return line;
        }
        worst = std::max(worst,
                         std::fabs(stat->coefficient - oracle.slopes[Eigen::Index(j)]));
    }
    line.pass = worst <= 1e-6;
    line.detail = "max |within - dummy| = " + format_double(worst);
    return line;
}

CheckLine check_group_means(const DemeanOptions& demean_options) {
    CheckLine line{"within means vanish", false, "", Stage::validate};
    CheckFixture fixture = make_fixture(911, true, true);
    FEGroups groups =
        FEGroups::from_observations(fixture.observations, true, true, true);

    Eigen::MatrixXd columns(fixture.y.rows(), fixture.x.cols() + 1);
    columns.col(0) = fixture.y;
    columns.rightCols(fixture.x.cols()) = fixture.x;
    // Scales are taken before demeaning: the kernel's own convergence bound is
    // tol times the original column magnitude, so the check must use the same
    // yardstick or a near-constant column would look worse than it is.
    Eigen::VectorXd scales = columns.cwiseAbs().colwise().maxCoeff();
    demean_matrix(columns, groups, demean_options);

    double worst = 0.0;
    for (Eigen::Index c = 0; c < columns.cols(); ++c) {
        const double scale = std::max(scales[c], 1e-300);
        for (int dim = 0; dim < groups.dimension_count(); ++dim) {
            std::vector<double> sums(size_t(groups.level_count(dim)), 0.0);
            std::vector<long> counts(size_t(groups.level_count(dim)), 0);
            const auto& index = groups.indices(dim);
            for (long i = 0; i < columns.rows(); ++i) {
                sums[size_t(index[size_t(i)])] += columns(i, c);
                counts[size_t(index[size_t(i)])] += 1;
            }
            for (size_t g = 0; g < sums.size(); ++g) {
                if (counts[g] > 0) {
                    worst = std::max(worst,
                                     std::fabs(sums[g] / double(counts[g])) / scale);
                }
            }
        }
    }
    const double bound = std::max(demean_options.tol, 1e-12) * 10.0;
    line.pass = worst <= bound;
    line.detail = "max scaled |group mean| = " + format_double(worst);
    return line;
}

CheckLine check_idempotence(const DemeanOptions& demean_options) {
    CheckLine line{"demeaning is idempotent", false, "", Stage::validate};
    CheckFixture fixture = make_fixture(912, true, true);
    FEGroups groups =
        FEGroups::from_observations(fixture.observations, true, true, true);

    Eigen::MatrixXd once = fixture.x;
    Eigen::VectorXd scales = once.cwiseAbs().colwise().maxCoeff();
    demean_matrix(once, groups, demean_options);
    Eigen::MatrixXd twice = once;
    demean_matrix(twice, groups, demean_options);

    double worst = 0.0;
    for (Eigen::Index c = 0; c < once.cols(); ++c) {
        const double scale = std::max(scales[c], 1e-300);
        worst = std::max(worst,
                         (twice.col(c) - once.col(c)).cwiseAbs().maxCoeff() / scale);
    }
    // The second pass may still walk to the shared fixed point, so allow a
    // generous multiple of the sweep tolerance; real breakage is orders of
    // magnitude above this.
    const double bound = std::max(demean_options.tol, 1e-12) * 100.0;
    line.pass = worst <= bound;
    line.detail = "max scaled change on second pass = " + format_double(worst);
    return line;
}

CheckLine check_translation_invariance(const DemeanOptions& demean_options) {
    CheckLine line{"translation invariance", false, "", Stage::validate};
    CheckFixture fixture = make_fixture(913, true, true);
    FEGroups groups =
        FEGroups::from_observations(fixture.observations, true, true, true);

    Eigen::MatrixXd base(fixture.y.rows(), 1);
    base.col(0) = fixture.y;
    Eigen::MatrixXd shifted = base.array() + 7.5;
    const double scale = std::max(base.col(0).cwiseAbs().maxCoeff(), 1e-300);
    demean_matrix(base, groups, demean_options);
    demean_matrix(shifted, groups, demean_options);

    const double worst = (shifted - base).cwiseAbs().maxCoeff() / scale;
    line.pass = worst <= std::max(demean_options.tol, 1e-12) * 100.0;
    line.detail = "max scaled difference = " + format_double(worst);
    return line;
}

CheckLine check_disconnected_df() {
    CheckLine line{"disconnected panel df", false, "", Stage::validate};

    // Two blocks of entities and periods with no cross links: 2 components,
    // so one redundant period level per extra component.
    std::vector<PanelObservation> observations;
    long i = 0;
    for (int block = 0; block < 2; ++block) {
        for (int e = 0; e < 2; ++e) {
            for (int p = 0; p < 2; ++p) {
                for (int rep = 0; rep < 3; ++rep) {
                    PanelObservation obs;
                    obs.x = {double((i * 7) % 13)};
                    obs.y = 2.0 * obs.x[0] + 0.3 * double(i % 5) + double(block);
                    obs.entity_key = "E" + std::to_string(block * 2 + e);
                    obs.quote_period_key = "P" + std::to_string(block * 2 + p);
                    obs.depart_period_key = "unused";
                    observations.push_back(std::move(obs));
                    ++i;
                }
            }
        }
    }

    FEGroups groups = FEGroups::from_observations(observations, true, true, false);
    const long n = long(observations.size());
    Eigen::VectorXd y(n);
    Eigen::MatrixXd x(n, 1);
    for (long r = 0; r < n; ++r) {
        y[r] = observations[size_t(r)].y;
        x(r, 0) = observations[size_t(r)].x[0];
    }

    const long df = df_residual(n, 1, groups);
    LsdvResult oracle = lsdv_oracle(y, x, groups);
    line.pass = df == n - oracle.design_rank &&
                groups.connected_components() == 2;
    line.detail = "df=" + std::to_string(df) + " n-rank=" +
                  std::to_string(n - oracle.design_rank) +
                  " components=" + std::to_string(groups.connected_components());
    return line;
}

}  // namespace

int run_check(const RunConfig& config, std::ostream& log) {
    ensure_output_dir(config);
    DemeanOptions demean_options;
    demean_options.tol = config.demean_tol;

    std::vector<CheckLine> lines;
    auto run_one = [&lines](const std::string& name, auto&& body) {
        CheckLine line{name, false, "", Stage::validate};
        try {
            line = body();
            line.name = name;
        } catch (const Error& e) {
            line.pass = false;
            line.detail = e.what();
            line.fail_stage = e.stage();
        } catch (const std::exception& e) {
            line.pass = false;
            line.detail = e.what();
        }
        lines.push_back(std::move(line));
    };

    run_one("within equals dummy regression (3 dims)", [&] {
        return check_oracle_equivalence("", 901, true, true, demean_options);
    });
    run_one("within equals dummy regression (2 dims)", [&] {
        return check_oracle_equivalence("", 902, true, false, demean_options);
    });
    run_one("within equals dummy regression (1 dim)", [&] {
        return check_oracle_equivalence("", 903, false, false, demean_options);
    });
    run_one("within means vanish", [&] { return check_group_means(demean_options); });
    run_one("demeaning is idempotent",
            [&] { return check_idempotence(demean_options); });
    run_one("translation invariance",
            [&] { return check_translation_invariance(demean_options); });
    run_one("disconnected panel df", [] { return check_disconnected_df(); });

    std::string matrix;
    size_t passed = 0;
    for (const auto& line : lines) {
        std::string text = line.name;
        if (text.size() < 44) {
            text += std::string(44 - text.size(), ' ');
        }
        text += line.pass ? "pass" : "FAIL";
        matrix += text + "\n";
        if (!line.detail.empty()) {
            matrix += "    " + line.detail + "\n";
        }
        passed += line.pass ? 1 : 0;
    }
    matrix += "checks passed: " + std::to_string(passed) + "/" +
              std::to_string(lines.size()) + "\n";

    log << matrix;
    write_text_file(join_path(config.output_dir, "check_report.txt"), matrix);

    if (passed == lines.size()) {
        return 0;
    }
    for (const auto& line : lines) {
        if (!line.pass && line.fail_stage == Stage::converge) {
            return int(Stage::converge);
        }
    }
    return int(Stage::validate);
}

int exit_code_for(const Error& error) { return int(error.stage()); }

}  // namespace airfare
