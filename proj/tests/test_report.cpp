#include <string>
#include <vector>

#include <doctest.h>

#include "airfare/estimator.hpp"
#include "airfare/report.hpp"
#include "test_util.hpp"

using namespace airfare;

namespace {

FitResult stub_fit(std::vector<CoefficientStat> stats, long n_obs, double adj_r2) {
    FitResult fit;
    fit.coefficients = std::move(stats);
    fit.n_obs = n_obs;
    fit.adj_r2 = adj_r2;
    return fit;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    size_t start = 0;
    while (start < text.size()) {
        const size_t end = text.find('\n', start);
        lines.push_back(text.substr(start, end - start));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return lines;
}

}  // namespace

TEST_CASE("three-decimal display") {
    CHECK(format_3d(12.119) == "12.119");
    CHECK(format_3d(-0.317) == "-0.317");
    CHECK(format_3d(-30.891) == "-30.891");
    CHECK(format_3d(1.0) == "1.000");
    CHECK(format_3d(0.00051) == "0.001");
    CHECK(format_3d(-0.0001) == "0.000");  // no negative zero
    CHECK(format_3d(0.0) == "0.000");
}

TEST_CASE("format names") {
    CHECK(parse_format("text") == TableFormat::text);
    CHECK(parse_format("delim") == TableFormat::delim);
    CHECK(parse_format("markup") == TableFormat::markup);
    CHECK(std::string(to_string(TableFormat::delim)) == "delim");
    CHECK_THROWS_AS(parse_format("csv"), ValidationError);
}

TEST_CASE("text table bytes") {
    const FitResult fit =
        stub_fit({{"x", 1.234, 0.1, 12.34, 0.004, "**"}}, 20, 0.5);
    TableLayout layout;
    layout.column_groups = {"(1) price"};
    layout.rows = {"x"};

    const std::string table = render_table({fit}, layout, TableFormat::text);

    // Widths: labels 18 ("Adjusted R-squared"), coef 7 ("1.234**"), se 5.
    const std::string rule(18 + 2 + 7 + 2 + 5, '-');
    std::string expected;
    expected += std::string(20, ' ') + "(1) price\n";
    expected += rule + "\n";
    expected += "x" + std::string(19, ' ') + "1.234**  0.100\n";
    expected += rule + "\n";
    expected += "Observations" + std::string(13, ' ') + "20\n";
    expected += "Adjusted R-squared" + std::string(4, ' ') + "0.500\n";
    CHECK(table == expected);

    // Rendering is a pure function of its inputs.
    CHECK(render_table({fit}, layout, TableFormat::text) == table);
}

TEST_CASE("coefficient cells carry stars next to the estimate") {
    const FitResult fit = stub_fit({{"hday_dept_eve", 12.119, 0.76, 15.9, 1e-8, "***"},
                                    {"adv_days", -0.317, 0.004, -79.0, 1e-12, "***"},
                                    {"nstop", -30.891, 0.55, -56.0, 1e-12, "***"}},
                                   52020, 0.832);
    TableLayout layout;
    layout.column_groups = {"log fare"};
    layout.rows = {"hday_dept_eve", "adv_days", "nstop"};

    const std::string table = render_table({fit}, layout, TableFormat::text);
    CHECK(table.find("12.119***") != std::string::npos);
    CHECK(table.find("-0.317***") != std::string::npos);
    CHECK(table.find("-30.891***") != std::string::npos);
    CHECK(table.find("0.832") != std::string::npos);
    CHECK(table.find("52020") != std::string::npos);

    // No trailing whitespace on any line.
    for (const auto& line : split_lines(table)) {
        if (!line.empty()) {
            CHECK(line.back() != ' ');
        }
    }
}

TEST_CASE("a long heading widens its column group") {
    const FitResult fit = stub_fit({{"x", 1.0, 0.5, 2.0, 0.1, ""}}, 10, 0.1);
    TableLayout layout;
    layout.column_groups = {"a very long column heading"};
    layout.rows = {"x"};
    const std::string table = render_table({fit}, layout, TableFormat::text);
    const auto lines = split_lines(table);
    REQUIRE(lines.size() >= 2);
    // The dash rule spans at least label + separators + heading.
    CHECK(lines[1].size() >= 12 + 2 + layout.column_groups[0].size());
    CHECK(lines[0].find("a very long column heading") != std::string::npos);
}

TEST_CASE("rows missing from some fits render blank there") {
    const FitResult a = stub_fit({{"alpha", 1.0, 0.05, 20.0, 1e-6, "***"},
                                  {"beta", 2.0, 0.5, 4.0, 0.01, "*"}},
                                 30, 0.4);
    const FitResult b = stub_fit({{"beta", 2.1, 0.6, 3.5, 0.02, "*"},
                                  {"gamma", -1.0, 0.4, -2.5, 0.04, "*"}},
                                 28, 0.3);
    TableLayout layout;
    layout.column_groups = {"M1", "M2"};
    layout.rows = {"alpha", "beta", "gamma"};

    const std::string delim = render_table({a, b}, layout, TableFormat::delim);
    const auto lines = split_lines(delim);
    REQUIRE(lines.size() >= 6);
    CHECK(lines[0] == "regressor\tM1 coef\tM1 se\tM2 coef\tM2 se");
    CHECK(lines[1] == "alpha\t1.000***\t0.050\t\t");
    CHECK(lines[2] == "beta\t2.000*\t0.500\t2.100*\t0.600");
    CHECK(lines[3] == "gamma\t\t\t-1.000*\t0.400");
    CHECK(lines[4] == "Observations\t30\t\t28\t");
    CHECK(lines[5] == "Adjusted R-squared\t0.400\t\t0.300\t");

    // A row no fit can supply is an error that names the row.
    TableLayout bad = layout;
    bad.rows.push_back("delta");
    CHECK_THROWS_WITH_AS(render_table({a, b}, bad, TableFormat::delim),
                         doctest::Contains("delta"), RenderError);
}

TEST_CASE("markup table bytes") {
    const FitResult fit =
        stub_fit({{"x", 1.234, 0.1, 12.34, 0.004, "**"}}, 20, 0.5);
    TableLayout layout;
    layout.column_groups = {"M1"};
    layout.rows = {"x"};
    layout.notes = {"one note"};

    const std::string expected =
        "| regressor | M1 | se |\n"
        "|---|---:|---:|\n"
        "| x | 1.234** | 0.100 |\n"
        "| | | |\n"
        "| Observations | 20 |  |\n"
        "| Adjusted R-squared | 0.500 |  |\n"
        "\n"
        "one note\n";
    CHECK(render_table({fit}, layout, TableFormat::markup) == expected);
}

TEST_CASE("delim notes are comment lines") {
    const FitResult fit = stub_fit({{"x", 1.0, 0.5, 2.0, 0.1, ""}}, 10, 0.1);
    TableLayout layout;
    layout.column_groups = {"M1"};
    layout.rows = {"x"};
    layout.notes = {"first", "second"};
    const std::string delim = render_table({fit}, layout, TableFormat::delim);
    const auto lines = split_lines(delim);
    REQUIRE(lines.size() >= 6);
    CHECK(lines[4] == "# first");
    CHECK(lines[5] == "# second");
}

TEST_CASE("footers can be turned off") {
    const FitResult fit = stub_fit({{"x", 1.0, 0.5, 2.0, 0.1, ""}}, 10, 0.1);
    TableLayout layout;
    layout.column_groups = {"M1"};
    layout.rows = {"x"};
    layout.footer_observations = false;
    layout.footer_adj_r2 = false;

    const std::string table = render_table({fit}, layout, TableFormat::text);
    CHECK(table.find("Observations") == std::string::npos);
    CHECK(table.find("Adjusted") == std::string::npos);
    // Only the header rule remains.
    int dash_lines = 0;
    for (const auto& line : split_lines(table)) {
        if (!line.empty() && line.find_first_not_of('-') == std::string::npos) {
            ++dash_lines;
        }
    }
    CHECK(dash_lines == 1);
}

TEST_CASE("render input validation") {
    const FitResult fit = stub_fit({{"x", 1.0, 0.5, 2.0, 0.1, ""}}, 10, 0.1);
    TableLayout layout;
    layout.column_groups = {"M1"};
    layout.rows = {"x"};

    CHECK_THROWS_AS(render_table({}, layout, TableFormat::text), RenderError);

    TableLayout mismatched = layout;
    mismatched.column_groups = {"M1", "M2"};
    CHECK_THROWS_AS(render_table({fit}, mismatched, TableFormat::text), RenderError);

    TableLayout no_rows = layout;
    no_rows.rows.clear();
    CHECK_THROWS_AS(render_table({fit}, no_rows, TableFormat::text), RenderError);
}

TEST_CASE("default layout collects rows in first appearance order") {
    const FitResult a = stub_fit({{"b", 1.0, 0.1, 10.0, 0.0, "***"},
                                  {"a", 2.0, 0.1, 20.0, 0.0, "***"}},
                                 10, 0.2);
    const FitResult b = stub_fit({{"a", 2.0, 0.1, 20.0, 0.0, "***"},
                                  {"c", 3.0, 0.1, 30.0, 0.0, "***"}},
                                 12, 0.3);
    const TableLayout layout = default_layout({a, b}, {"M1", "M2"});
    CHECK(layout.rows == std::vector<std::string>{"b", "a", "c"});
    CHECK(layout.column_groups == std::vector<std::string>{"M1", "M2"});
    REQUIRE(layout.notes.size() == 2);
    CHECK(layout.notes[1] == "*** p<0.001, ** p<0.01, * p<0.05");

    CHECK_THROWS_AS(default_layout({a, b}, {"M1"}), ValidationError);
}

TEST_CASE("a sixteen-regressor table keeps every row") {
    const std::vector<std::string> names = {
        "hday_qut_eve",     "hday_quote_n_of_days", "hday_qut_post",
        "hday_dept_eve",    "hday_dept_n_of_days",  "hday_dept_post",
        "qholndays_3",      "dholndays_3",          "adv_days",
        "nstop",            "usd",                  "conn_pax",
        "nairlines_a_pair", "nairlines_adj_pair",   "nairlines_airp_o",
        "fin_crisis"};
    std::vector<CoefficientStat> stats;
    for (size_t i = 0; i < names.size(); ++i) {
        stats.push_back({names[i], double(i) + 0.5, 0.25, 4.0, 0.001, "**"});
    }
    const FitResult fit = stub_fit(std::move(stats), 52020, 0.83);
    const TableLayout layout = default_layout({fit}, {"log fare"});
    REQUIRE(layout.rows.size() == 16);

    const std::string delim = render_table({fit}, layout, TableFormat::delim);
    const auto lines = split_lines(delim);
    // Header + 16 body rows + 2 footer rows + 2 notes.
    REQUIRE(lines.size() >= 19);
    for (size_t i = 0; i < names.size(); ++i) {
        CHECK(lines[1 + i].rfind(names[i] + "\t", 0) == 0);
    }
}

TEST_CASE("exported records round trip bit for bit") {
    // A real fit, so every field is exercised with non-trivial values.
    std::vector<std::string> e, q;
    std::vector<double> yv;
    std::vector<std::vector<double>> xv;
    for (long i = 0; i < 24; ++i) {
        e.push_back("e" + std::to_string(i % 4));
        q.push_back("q" + std::to_string((i / 4) % 3));
        xv.push_back({testutil::wobble(i), testutil::wobble(i + 31)});
        yv.push_back(0.7 * xv.back()[0] + testutil::wobble(i + 77));
    }
    ModelSpec spec;
    spec.regressors = {"x0", "x1"};
    spec.absorb_depart_period = false;
    spec.origin_airports = {"CGH"};
    spec.label = "congonhas";
    const FitResult fit = fit_observations(
        testutil::make_observations(yv, xv, e, q, {}), spec.regressors, spec);

    const nlohmann::json record = export_results(fit, spec);
    CHECK(record.at("tool_version").get<std::string>() == kToolVersion);

    // Through text and back: shortest-round-trip doubles lose nothing.
    const std::string text = record.dump(2);
    const nlohmann::json parsed = nlohmann::json::parse(text);
    const FitResult fit_back = import_fit(parsed);
    const ModelSpec spec_back = import_spec(parsed);

    CHECK(fit_back == fit);
    CHECK(spec_back == spec);

    // Serialization itself is stable.
    CHECK(nlohmann::json::parse(text).dump(2) == text);
}

TEST_CASE("JSON bindings for the domain types") {
    SUBCASE("dates are ISO strings") {
        const nlohmann::json j = Date{2008, 10, 1};
        CHECK(j.get<std::string>() == "2008-10-01");
        CHECK(j.get<Date>() == Date{2008, 10, 1});
    }

    SUBCASE("holidays default to one day, not excluded") {
        const auto h = nlohmann::json{{"name", "festa"}, {"start_date", "2008-06-10"}}
                           .get<HolidaySpec>();
        CHECK(h.name == "festa");
        CHECK(h.length_days == 1);
        CHECK_FALSE(h.excluded);
    }

    SUBCASE("event ranges keep the open end") {
        EventRange open;
        open.name = "crisis";
        open.start = Date{2008, 10, 1};
        open.applies_to = EventDateField::quotation;
        const nlohmann::json j = open;
        CHECK(j.at("end").is_null());
        const EventRange back = j.get<EventRange>();
        CHECK(back == open);

        nlohmann::json bad = j;
        bad["applies_to"] = "arrival";
        CHECK_THROWS_AS(bad.get<EventRange>(), ValidationError);

        nlohmann::json departure = j;
        departure["applies_to"] = "departure";
        CHECK(departure.get<EventRange>().applies_to == EventDateField::departure);
    }

    SUBCASE("window config distinguishes null from absent") {
        HolidayWindowConfig config;
        config.holiday_length_filter.reset();
        const nlohmann::json j = config;
        CHECK(j.at("holiday_length_filter").is_null());
        const auto back = j.get<HolidayWindowConfig>();
        CHECK_FALSE(back.holiday_length_filter.has_value());

        // Absent key keeps the default filter of 3.
        const auto defaults =
            nlohmann::json{{"eve_days", 2}, {"post_days", 2}}.get<HolidayWindowConfig>();
        CHECK(defaults.eve_days == 2);
        REQUIRE(defaults.holiday_length_filter.has_value());
        CHECK(*defaults.holiday_length_filter == 3);
    }

    SUBCASE("a minimal spec gets every default") {
        const auto spec = nlohmann::json{{"regressors", {"adv_days"}}}.get<ModelSpec>();
        CHECK(spec.regressors == std::vector<std::string>{"adv_days"});
        CHECK(spec.absorb_entity);
        CHECK(spec.granularity == TimeGranularity::month);
        CHECK(spec.depvar == DepVarTransform::log100);
        CHECK(spec.stops_filter == -1);
        CHECK(spec.adv_bucket_thresholds == std::vector<int>{3, 5, 7, 10, 30, 45, 60});
        CHECK(spec.directed_pairs);
        CHECK(spec.label == "price");
    }
}
