#include <filesystem>
#include <fstream>
#include <sstream>

#include "airfare/errors.hpp"
#include "airfare/report.hpp"
#include "airfare/run.hpp"
#include "doctest.h"

using namespace airfare;
namespace fs = std::filesystem;

namespace {

// Scratch directory under the test's working directory, wiped on entry so
// reruns start clean. Left in place on exit for post-mortems.
struct TempDir {
    fs::path path;

    explicit TempDir(const std::string& name) : path(fs::path("run_test_tmp") / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }

    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    REQUIRE(bool(out));
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

DGPSpec small_dgp(std::uint64_t seed) {
    DGPSpec dgp;
    dgp.coefficients = {
        {"adv_days", -0.3}, {"nstop", -25.0}, {"hday_dept_eve", 10.0}};
    dgp.n_airlines = 3;
    dgp.n_destinations = 4;
    dgp.n_quote_months = 3;
    dgp.n_depart_months = 6;
    dgp.rows = 300;
    dgp.sigma_noise = 8.0;
    dgp.seed = seed;
    dgp.decoys_per_hundred = 5;
    return dgp;
}

}  // namespace

TEST_CASE("run config defaults and selected-path fallback") {
    RunConfig config;
    CHECK(config.output_dir == ".");
    CHECK(config.keep_origins == std::vector<std::string>{"CGH", "GRU"});
    CHECK(config.format == TableFormat::text);
    CHECK_FALSE(config.robust_se);
    CHECK(config.demean_tol == 1e-8);
    CHECK(config.specs.empty());

    CHECK(config.resolved_selected_path() ==
          (fs::path(".") / "selected.csv").string());
    config.output_dir = "out";
    CHECK(config.resolved_selected_path() ==
          (fs::path("out") / "selected.csv").string());
    config.selected_path = "picked.csv";
    CHECK(config.resolved_selected_path() == "picked.csv");
}

TEST_CASE("run config json round trip") {
    RunConfig config;
    config.quotes_path = "q.csv";
    config.selected_path = "s.csv";
    config.calendar_path = "cal.json";
    config.usd_path = "usd.csv";
    config.conn_pax_path = "pax.csv";
    config.nairlines_path = "na.csv";
    config.events_path = "ev.json";
    config.output_dir = "out";
    ModelSpec spec;
    spec.label = "alpha";
    spec.regressors = {"adv_days"};
    config.specs = {spec};
    config.keep_origins = {"GRU"};
    config.dgp.seed = 5;
    config.dgp.rows = 1234;
    config.format = TableFormat::delim;
    config.robust_se = true;
    config.demean_tol = 1e-10;

    const nlohmann::json j = config.to_json();
    const RunConfig back = RunConfig::from_json(j);

    CHECK(back.quotes_path == "q.csv");
    CHECK(back.selected_path == "s.csv");
    CHECK(back.calendar_path == "cal.json");
    CHECK(back.usd_path == "usd.csv");
    CHECK(back.conn_pax_path == "pax.csv");
    CHECK(back.nairlines_path == "na.csv");
    CHECK(back.events_path == "ev.json");
    CHECK(back.output_dir == "out");
    REQUIRE(back.specs.size() == 1);
    CHECK(back.specs[0].label == "alpha");
    CHECK(back.specs[0].regressors == std::vector<std::string>{"adv_days"});
    CHECK(back.keep_origins == std::vector<std::string>{"GRU"});
    REQUIRE(back.dgp.seed.has_value());
    CHECK(*back.dgp.seed == 5);
    CHECK(back.dgp.rows == 1234);
    CHECK(back.format == TableFormat::delim);
    CHECK(back.robust_se);
    CHECK(back.demean_tol == 1e-10);

    CHECK(back.to_json() == j);
}

TEST_CASE("run config parsing rejects bad values and fills defaults") {
    const RunConfig config = RunConfig::from_json(nlohmann::json::object());
    CHECK(config.quotes_path.empty());
    CHECK(config.output_dir == ".");
    CHECK(config.keep_origins == std::vector<std::string>{"CGH", "GRU"});
    CHECK(config.demean_tol == 1e-8);

    CHECK_THROWS_WITH_AS(
        RunConfig::from_json(nlohmann::json{{"demean_tol", -1.0}}),
        "[validate] config: demean_tol must be >= 0", ValidationError);
    CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json{{"format", "csv"}}),
                    ValidationError);
}

TEST_CASE("run config file loading") {
    TempDir dir("config_load");

    write_file(dir.file("ok.json"),
               R"({"paths": {"quotes": "a.csv", "output_dir": "o"}, "demean_tol": 1e-9})");
    const RunConfig config = RunConfig::load(dir.file("ok.json"));
    CHECK(config.quotes_path == "a.csv");
    CHECK(config.output_dir == "o");
    CHECK(config.demean_tol == 1e-9);

    CHECK_THROWS_AS(RunConfig::load(dir.file("missing.json")), IoError);
    write_file(dir.file("broken.json"), "{{{");
    CHECK_THROWS_WITH_AS(RunConfig::load(dir.file("broken.json")),
                         doctest::Contains("is not valid JSON"), ParseError);
}

TEST_CASE("dgp spec json round trip") {
    DGPSpec dgp = small_dgp(21);
    dgp.absorb_depart_period = false;
    dgp.sigma_entity = 2.5;
    dgp.start_date = Date{2010, 3, 1};
    dgp.base_level = 580.0;

    const nlohmann::json j = dgp;
    const DGPSpec back = j.get<DGPSpec>();
    CHECK(back.coefficients == dgp.coefficients);
    CHECK(back.n_airlines == dgp.n_airlines);
    CHECK(back.n_destinations == dgp.n_destinations);
    CHECK(back.n_quote_months == dgp.n_quote_months);
    CHECK(back.n_depart_months == dgp.n_depart_months);
    CHECK(back.absorb_entity == dgp.absorb_entity);
    CHECK(back.absorb_quote_period == dgp.absorb_quote_period);
    CHECK(back.absorb_depart_period == dgp.absorb_depart_period);
    CHECK(back.sigma_entity == dgp.sigma_entity);
    CHECK(back.sigma_noise == dgp.sigma_noise);
    CHECK(back.rows == dgp.rows);
    CHECK(back.start_date == dgp.start_date);
    CHECK(back.base_level == dgp.base_level);
    CHECK(back.decoys_per_hundred == dgp.decoys_per_hundred);
    REQUIRE(back.seed.has_value());
    CHECK(*back.seed == 21);

    SUBCASE("null seed round trips to unset") {
        dgp.seed.reset();
        const nlohmann::json unset = dgp;
        CHECK(unset.at("seed").is_null());
        CHECK_FALSE(unset.get<DGPSpec>().seed.has_value());
    }
}

TEST_CASE("calendar file round trip") {
    TempDir dir("calendar");

    HolidayCalendar calendar;
    calendar.add({"festa", Date{2008, 6, 10}, 3, false});
    calendar.add({"quiet", Date{2008, 9, 7}, 1, true});
    write_calendar(calendar, dir.file("cal.json"));

    const HolidayCalendar back = load_calendar(dir.file("cal.json"));
    REQUIRE(back.entries().size() == 2);
    CHECK(back.entries()[0].name == "festa");
    CHECK(back.entries()[0].start_date == Date{2008, 6, 10});
    CHECK(back.entries()[0].length_days == 3);
    CHECK_FALSE(back.entries()[0].excluded);
    CHECK(back.entries()[1].name == "quiet");
    CHECK(back.entries()[1].excluded);

    write_file(dir.file("object.json"), "{}");
    CHECK_THROWS_WITH_AS(load_calendar(dir.file("object.json")),
                         doctest::Contains("must be a JSON array"), ParseError);
    CHECK_THROWS_AS(load_calendar(dir.file("missing.json")), IoError);
}

TEST_CASE("exogenous files round trip") {
    TempDir dir("exogenous");

    RunConfig config;
    config.usd_path = dir.file("usd.csv");
    config.conn_pax_path = dir.file("conn_pax.csv");
    config.nairlines_path = dir.file("nairlines.csv");
    config.events_path = dir.file("events.json");

    ExogenousData data;
    data.usd = {{Date{2008, 6, 1}, 1.62}, {Date{2008, 6, 2}, 1.63}};
    data.conn_pax = {{Date{2008, 7, 1}, 1234.0}};
    data.airline_counts[{Date{2008, 7, 1}, "CGH", "SDU"}] = {3.0, 5.0, 7.0};
    data.events.push_back(
        {"promo", Date{2008, 6, 1}, Date{2008, 6, 10}, EventDateField::departure});
    write_exogenous(data, config);

    const ExogenousData back = load_exogenous(config);
    CHECK(back.usd == data.usd);
    CHECK(back.conn_pax == data.conn_pax);
    CHECK(back.airline_counts == data.airline_counts);
    REQUIRE(back.events.size() == 1);
    CHECK(back.events[0] == data.events[0]);
}

TEST_CASE("exogenous loading skips empty paths") {
    const ExogenousData data = load_exogenous(RunConfig{});
    CHECK(data.usd.empty());
    CHECK(data.conn_pax.empty());
    CHECK(data.airline_counts.empty());
    CHECK(data.events.empty());
}

TEST_CASE("exogenous loading rejects malformed files") {
    TempDir dir("exogenous_bad");
    RunConfig config;

    SUBCASE("usd header") {
        config.usd_path = dir.file("usd.csv");
        write_file(config.usd_path, "date,value\n2008-06-01,1.62\n");
        CHECK_THROWS_WITH_AS(load_exogenous(config),
                             doctest::Contains("header must be 'date,usd'"),
                             ParseError);
    }
    SUBCASE("usd field count") {
        config.usd_path = dir.file("usd.csv");
        write_file(config.usd_path, "date,usd\n2008-06-01\n");
        CHECK_THROWS_WITH_AS(load_exogenous(config),
                             doctest::Contains("line 2: expected 2 fields"),
                             ParseError);
    }
    SUBCASE("usd bad number") {
        config.usd_path = dir.file("usd.csv");
        write_file(config.usd_path, "date,usd\n2008-06-01,abc\n");
        CHECK_THROWS_WITH_AS(load_exogenous(config),
                             doctest::Contains("bad number 'abc'"), ParseError);
    }
    SUBCASE("crlf line endings are accepted") {
        config.usd_path = dir.file("usd.csv");
        write_file(config.usd_path, "date,usd\r\n2008-06-01,1.62\r\n");
        const ExogenousData data = load_exogenous(config);
        REQUIRE(data.usd.size() == 1);
        CHECK(data.usd.at(Date{2008, 6, 1}) == 1.62);
    }
    SUBCASE("conn_pax header") {
        config.conn_pax_path = dir.file("pax.csv");
        write_file(config.conn_pax_path, "date,pax\n");
        CHECK_THROWS_WITH_AS(load_exogenous(config),
                             doctest::Contains("header must be 'date,conn_pax'"),
                             ParseError);
    }
    SUBCASE("nairlines header") {
        config.nairlines_path = dir.file("na.csv");
        write_file(config.nairlines_path, "date,origin,dest,a,b,c\n");
        CHECK_THROWS_WITH_AS(load_exogenous(config),
                             doctest::Contains("header must be date,origin"),
                             ParseError);
    }
    SUBCASE("nairlines field count") {
        config.nairlines_path = dir.file("na.csv");
        write_file(config.nairlines_path,
                   "date,origin,destination,nairlines_a_pair,nairlines_adj_pair,"
                   "nairlines_airp_o\n2008-07-01,CGH,SDU,3,5\n");
        CHECK_THROWS_WITH_AS(load_exogenous(config),
                             doctest::Contains("line 2: expected 6 fields"),
                             ParseError);
    }
    SUBCASE("events must be an array") {
        config.events_path = dir.file("events.json");
        write_file(config.events_path, "{}");
        CHECK_THROWS_WITH_AS(load_exogenous(config),
                             doctest::Contains("must be a JSON array"), ParseError);
    }
}

TEST_CASE("ingest command requires a quotes path") {
    std::ostringstream log;
    CHECK_THROWS_WITH_AS(run_ingest(RunConfig{}, log),
                         "[validate] config: paths.quotes is required for ingest",
                         ValidationError);
}

TEST_CASE("fit command requires at least one spec") {
    std::ostringstream log;
    CHECK_THROWS_WITH_AS(
        run_fit(RunConfig{}, log),
        "[validate] config: at least one model spec is required for fit",
        ValidationError);
}

TEST_CASE("synth ingest fit pipeline runs end to end deterministically") {
    TempDir dir("pipeline");

    RunConfig config;
    config.output_dir = dir.path.string();
    config.dgp = small_dgp(77);

    std::ostringstream log;
    REQUIRE(run_synth(config, log) == 0);
    CHECK(fs::exists(dir.file("synthetic_quotes.csv")));
    CHECK(fs::exists(dir.file("synthetic_calendar.json")));
    CHECK(fs::exists(dir.file("usd.csv")));
    CHECK(fs::exists(dir.file("conn_pax.csv")));
    CHECK(fs::exists(dir.file("truth.json")));
    CHECK(fs::exists(dir.file("synthetic_config.json")));
    // No airline-count or event regressors were planted, so those inputs are
    // not written and the generated config leaves their paths empty.
    CHECK_FALSE(fs::exists(dir.file("nairlines.csv")));
    CHECK_FALSE(fs::exists(dir.file("events.json")));

    RunConfig pipeline = RunConfig::load(dir.file("synthetic_config.json"));
    CHECK(pipeline.quotes_path == dir.file("synthetic_quotes.csv"));
    CHECK(pipeline.nairlines_path.empty());
    CHECK(pipeline.events_path.empty());
    REQUIRE(pipeline.specs.size() == 1);

    REQUIRE(run_ingest(pipeline, log) == 0);
    CHECK(fs::exists(dir.file("selected.csv")));
    CHECK(fs::exists(dir.file("selection_report.txt")));

    REQUIRE(run_fit(pipeline, log) == 0);
    REQUIRE(fs::exists(dir.file("table.txt")));
    REQUIRE(fs::exists(dir.file("results.json")));

    const std::string table = read_file(dir.file("table.txt"));
    CHECK(table.find("Observations") != std::string::npos);
    CHECK(table.find("adv_days") != std::string::npos);

    const nlohmann::json records =
        nlohmann::json::parse(read_file(dir.file("results.json")));
    REQUIRE(records.is_array());
    REQUIRE(records.size() == 1);
    CHECK(records[0].at("tool_version").get<std::string>() == kToolVersion);
    const FitResult fit = import_fit(records[0]);
    CHECK(fit.n_obs > 0);
    CHECK(fit.find("adv_days") != nullptr);

    SUBCASE("re-running fit reproduces the outputs byte for byte") {
        const std::string table_once = read_file(dir.file("table.txt"));
        const std::string records_once = read_file(dir.file("results.json"));
        std::ostringstream rerun_log;
        REQUIRE(run_fit(pipeline, rerun_log) == 0);
        CHECK(read_file(dir.file("table.txt")) == table_once);
        CHECK(read_file(dir.file("results.json")) == records_once);
    }

    SUBCASE("rendered format follows the config") {
        pipeline.format = TableFormat::delim;
        REQUIRE(run_fit(pipeline, log) == 0);
        REQUIRE(fs::exists(dir.file("table.tsv")));
        const std::string tsv = read_file(dir.file("table.tsv"));
        CHECK(tsv.find('\t') != std::string::npos);

        pipeline.format = TableFormat::markup;
        REQUIRE(run_fit(pipeline, log) == 0);
        REQUIRE(fs::exists(dir.file("table.md")));
        CHECK(read_file(dir.file("table.md")).find("|---") != std::string::npos);
    }
}

TEST_CASE("check command passes on a pristine build") {
    TempDir dir("check_pass");
    RunConfig config;
    config.output_dir = dir.path.string();

    std::ostringstream log;
    const int code = run_check(config, log);
    CHECK(code == 0);

    const std::string report = read_file(dir.file("check_report.txt"));
    CHECK(report == log.str());
    CHECK(report.find("checks passed: 7/7") != std::string::npos);
    CHECK(report.find("FAIL") == std::string::npos);
    for (const char* name :
         {"within equals dummy regression (3 dims)",
          "within equals dummy regression (2 dims)",
          "within equals dummy regression (1 dim)", "within means vanish",
          "demeaning is idempotent", "translation invariance",
          "disconnected panel df"}) {
        CHECK(report.find(name) != std::string::npos);
    }
}

TEST_CASE("check command reports the forced convergence failure") {
    TempDir dir("check_fail");
    RunConfig config;
    config.output_dir = dir.path.string();
    config.demean_tol = 0.0;

    std::ostringstream log;
    const int code = run_check(config, log);
    CHECK(code == int(Stage::converge));

    const std::string report = read_file(dir.file("check_report.txt"));
    CHECK(report.find("FAIL") != std::string::npos);
    // The df check never demeans and the single-dimension check is an exact
    // one-sweep projection, so those two survive a zero tolerance.
    CHECK(report.find("checks passed: 2/7") != std::string::npos);
}

TEST_CASE("exit codes are distinct per failure stage") {
    CHECK(exit_code_for(ParseError("x")) == 1);
    CHECK(exit_code_for(ValidationError("x")) == 2);
    CHECK(exit_code_for(ConvergenceError("x", 0.5, 10)) == 3);
    CHECK(exit_code_for(RenderError("x")) == 4);
    CHECK(exit_code_for(IoError("x")) == 5);
}
