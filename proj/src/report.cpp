#include "airfare/report.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace airfare {

TableFormat parse_format(const std::string& text) {
    if (text == "text") return TableFormat::text;
    if (text == "delim") return TableFormat::delim;
    if (text == "markup") return TableFormat::markup;
    throw ValidationError("unknown table format '" + text +
                          "' (expected text|delim|markup)");
}

const char* to_string(TableFormat format) {
    switch (format) {
        case TableFormat::text: return "text";
        case TableFormat::delim: return "delim";
        case TableFormat::markup: return "markup";
    }
    return "?";
}

std::string format_3d(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", value);
    std::string out = buf;
    if (out == "-0.000") {
        out = "0.000";
    }
    return out;
}

namespace {

struct Grid {
    // Per body/footer row: label then coef/se cell pairs, one pair per fit.
    std::vector<std::string> labels;
    std::vector<std::vector<std::pair<std::string, std::string>>> cells;
};

Grid build_grid(const std::vector<FitResult>& fits, const TableLayout& layout) {
    Grid grid;
    for (const auto& row : layout.rows) {
        bool found_anywhere = false;
        std::vector<std::pair<std::string, std::string>> line;
        for (const auto& fit : fits) {
            if (const CoefficientStat* stat = fit.find(row)) {
                found_anywhere = true;
                line.emplace_back(format_3d(stat->coefficient) + stat->stars,
                                  format_3d(stat->std_error));
            } else {
                line.emplace_back("", "");
            }
        }
        if (!found_anywhere) {
            throw RenderError("layout row '" + row + "' is missing from every fit");
        }
        grid.labels.push_back(row);
        grid.cells.push_back(std::move(line));
    }
    if (layout.footer_observations) {
        std::vector<std::pair<std::string, std::string>> line;
        for (const auto& fit : fits) {
            line.emplace_back(std::to_string(fit.n_obs), "");
        }
        grid.labels.push_back("Observations");
        grid.cells.push_back(std::move(line));
    }
    if (layout.footer_adj_r2) {
        std::vector<std::pair<std::string, std::string>> line;
        for (const auto& fit : fits) {
            line.emplace_back(format_3d(fit.adj_r2), "");
        }
        grid.labels.push_back("Adjusted R-squared");
        grid.cells.push_back(std::move(line));
    }
    return grid;
}

std::string pad_right(const std::string& s, size_t width) {
    return s + std::string(width - std::min(width, s.size()), ' ');
}

std::string pad_left(const std::string& s, size_t width) {
    return std::string(width - std::min(width, s.size()), ' ') + s;
}

std::string render_text(const Grid& grid, const TableLayout& layout,
                        size_t body_rows) {
    const size_t groups = layout.column_groups.size();
    size_t label_width = 0;
    for (const auto& label : grid.labels) {
        label_width = std::max(label_width, label.size());
    }

    std::vector<size_t> coef_width(groups, 0), se_width(groups, 0);
    for (const auto& line : grid.cells) {
        for (size_t g = 0; g < groups; ++g) {
            coef_width[g] = std::max(coef_width[g], line[g].first.size());
            se_width[g] = std::max(se_width[g], line[g].second.size());
        }
    }
    for (size_t g = 0; g < groups; ++g) {
        const size_t span = coef_width[g] + 2 + se_width[g];
        const size_t heading = layout.column_groups[g].size();
        if (heading > span) {
            se_width[g] += heading - span;
        }
    }

    std::string out;
    out += pad_right("", label_width);
    for (size_t g = 0; g < groups; ++g) {
        out += "  ";
        out += pad_right(layout.column_groups[g], coef_width[g] + 2 + se_width[g]);
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';

    size_t total = label_width;
    for (size_t g = 0; g < groups; ++g) {
        total += 2 + coef_width[g] + 2 + se_width[g];
    }
    out += std::string(total, '-');
    out += '\n';

    for (size_t r = 0; r < grid.labels.size(); ++r) {
        if (r == body_rows && r < grid.labels.size()) {
            out += std::string(total, '-');
            out += '\n';
        }
        std::string line = pad_right(grid.labels[r], label_width);
        for (size_t g = 0; g < groups; ++g) {
            line += "  " + pad_left(grid.cells[r][g].first, coef_width[g]);
            line += "  " + pad_left(grid.cells[r][g].second, se_width[g]);
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line;
        out += '\n';
    }

    if (!layout.notes.empty()) {
        out += '\n';
        for (const auto& note : layout.notes) {
            out += note;
            out += '\n';
        }
    }
    return out;
}

std::string render_delim(const Grid& grid, const TableLayout& layout) {
    std::string out = "regressor";
    for (const auto& heading : layout.column_groups) {
        out += '\t';
        out += heading + " coef";
        out += '\t';
        out += heading + " se";
    }
    out += '\n';
    for (size_t r = 0; r < grid.labels.size(); ++r) {
        out += grid.labels[r];
        for (const auto& [coef, se] : grid.cells[r]) {
            out += '\t';
            out += coef;
            out += '\t';
            out += se;
        }
        out += '\n';
    }
    for (const auto& note : layout.notes) {
        out += "# " + note + '\n';
    }
    return out;
}

std::string render_markup(const Grid& grid, const TableLayout& layout,
                          size_t body_rows) {
    std::string out = "| regressor |";
    for (const auto& heading : layout.column_groups) {
        out += ' ' + heading + " | se |";
    }
    out += "\n|---|";
    for (size_t g = 0; g < layout.column_groups.size(); ++g) {
        out += "---:|---:|";
    }
    out += '\n';
    for (size_t r = 0; r < grid.labels.size(); ++r) {
        if (r == body_rows) {
            out += "| |";
            for (size_t g = 0; g < layout.column_groups.size(); ++g) {
                out += " | |";
            }
            out += '\n';
        }
        out += "| " + grid.labels[r] + " |";
        for (const auto& [coef, se] : grid.cells[r]) {
            out += ' ' + coef + " | " + se + " |";
        }
        out += '\n';
    }
    if (!layout.notes.empty()) {
        out += '\n';
        for (const auto& note : layout.notes) {
            out += note;
            out += '\n';
        }
    }
    return out;
}

}  // namespace

std::string render_table(const std::vector<FitResult>& fits,
                         const TableLayout& layout, TableFormat format) {
    if (fits.empty()) {
        throw RenderError("render_table needs at least one fit");
    }
    if (layout.column_groups.size() != fits.size()) {
        throw RenderError("layout has " + std::to_string(layout.column_groups.size()) +
                          " column groups for " + std::to_string(fits.size()) +
                          " fits");
    }
    if (layout.rows.empty()) {
        throw RenderError("layout has no rows");
    }
    Grid grid = build_grid(fits, layout);
    switch (format) {
        case TableFormat::text: return render_text(grid, layout, layout.rows.size());
        case TableFormat::delim: return render_delim(grid, layout);
        case TableFormat::markup:
            return render_markup(grid, layout, layout.rows.size());
    }
    throw RenderError("unreachable table format");
}

TableLayout default_layout(const std::vector<FitResult>& fits,
                           const std::vector<std::string>& group_labels) {
    if (group_labels.size() != fits.size()) {
        throw ValidationError("one group label per fit required");
    }
    TableLayout layout;
    layout.column_groups = group_labels;
    std::set<std::string> seen;
    for (const auto& fit : fits) {
        for (const auto& stat : fit.coefficients) {
            if (seen.insert(stat.name).second) {
                layout.rows.push_back(stat.name);
            }
        }
    }
    layout.notes = {"Standard errors in second column",
                    "*** p<0.001, ** p<0.01, * p<0.05"};
    return layout;
}

// ---------------------------------------------------------------------------
// JSON bindings

void to_json(nlohmann::json& j, const Date& d) { j = d.to_string(); }

void from_json(const nlohmann::json& j, Date& d) {
    d = Date::parse(j.get<std::string>());
}

void to_json(nlohmann::json& j, const HolidaySpec& h) {
    j = {{"name", h.name},
         {"start_date", h.start_date},
         {"length_days", h.length_days},
         {"excluded", h.excluded}};
}

void from_json(const nlohmann::json& j, HolidaySpec& h) {
    h.name = j.at("name").get<std::string>();
    h.start_date = j.at("start_date").get<Date>();
    h.length_days = j.value("length_days", 1);
    h.excluded = j.value("excluded", false);
}

void to_json(nlohmann::json& j, const EventRange& e) {
    j = {{"name", e.name},
         {"start", e.start},
         {"applies_to",
          e.applies_to == EventDateField::quotation ? "quotation" : "departure"}};
    if (e.end) {
        j["end"] = *e.end;
    } else {
        j["end"] = nullptr;
    }
}

void from_json(const nlohmann::json& j, EventRange& e) {
    e.name = j.at("name").get<std::string>();
    e.start = j.at("start").get<Date>();
    e.end.reset();
    if (j.contains("end") && !j.at("end").is_null()) {
        e.end = j.at("end").get<Date>();
    }
    const std::string field = j.value("applies_to", std::string("quotation"));
    if (field == "quotation") {
        e.applies_to = EventDateField::quotation;
    } else if (field == "departure") {
        e.applies_to = EventDateField::departure;
    } else {
        throw ValidationError("event '" + e.name + "': applies_to must be "
                              "quotation or departure");
    }
}

void to_json(nlohmann::json& j, const HolidayWindowConfig& c) {
    j = {{"eve_days", c.eve_days}, {"post_days", c.post_days}};
    if (c.holiday_length_filter) {
        j["holiday_length_filter"] = *c.holiday_length_filter;
    } else {
        j["holiday_length_filter"] = nullptr;
    }
}

void from_json(const nlohmann::json& j, HolidayWindowConfig& c) {
    c = HolidayWindowConfig{};
    c.eve_days = j.value("eve_days", c.eve_days);
    c.post_days = j.value("post_days", c.post_days);
    if (j.contains("holiday_length_filter")) {
        if (j.at("holiday_length_filter").is_null()) {
            c.holiday_length_filter.reset();
        } else {
            c.holiday_length_filter = j.at("holiday_length_filter").get<int>();
        }
    }
}

void to_json(nlohmann::json& j, const ModelSpec& s) {
    j = {{"regressors", s.regressors},
         {"absorb_entity", s.absorb_entity},
         {"absorb_quote_period", s.absorb_quote_period},
         {"absorb_depart_period", s.absorb_depart_period},
         {"granularity", to_string(s.granularity)},
         {"depvar", to_string(s.depvar)},
         {"origin_airports", s.origin_airports},
         {"stops_filter", s.stops_filter},
         {"holiday_window", s.holiday_window},
         {"adv_bucket_thresholds", s.adv_bucket_thresholds},
         {"directed_pairs", s.directed_pairs},
         {"label", s.label}};
}

void from_json(const nlohmann::json& j, ModelSpec& s) {
    s = ModelSpec{};
    s.regressors = j.at("regressors").get<std::vector<std::string>>();
    s.absorb_entity = j.value("absorb_entity", s.absorb_entity);
    s.absorb_quote_period = j.value("absorb_quote_period", s.absorb_quote_period);
    s.absorb_depart_period = j.value("absorb_depart_period", s.absorb_depart_period);
    s.granularity = parse_granularity(j.value("granularity", std::string("month")));
    s.depvar = parse_depvar(j.value("depvar", std::string("log100")));
    s.origin_airports =
        j.value("origin_airports", std::vector<std::string>{});
    s.stops_filter = j.value("stops_filter", s.stops_filter);
    if (j.contains("holiday_window")) {
        s.holiday_window = j.at("holiday_window").get<HolidayWindowConfig>();
    }
    s.adv_bucket_thresholds =
        j.value("adv_bucket_thresholds", s.adv_bucket_thresholds);
    s.directed_pairs = j.value("directed_pairs", s.directed_pairs);
    s.label = j.value("label", s.label);
}

void to_json(nlohmann::json& j, const CoefficientStat& c) {
    j = {{"name", c.name},
         {"coefficient", c.coefficient},
         {"std_error", c.std_error},
         {"t_stat", c.t_stat},
         {"p_value", c.p_value},
         {"stars", c.stars}};
}

void from_json(const nlohmann::json& j, CoefficientStat& c) {
    c.name = j.at("name").get<std::string>();
    c.coefficient = j.at("coefficient").get<double>();
    c.std_error = j.at("std_error").get<double>();
    c.t_stat = j.at("t_stat").get<double>();
    c.p_value = j.at("p_value").get<double>();
    c.stars = j.at("stars").get<std::string>();
}

void to_json(nlohmann::json& j, const DroppedColumn& d) {
    j = {{"name", d.name}, {"reason", d.reason}};
}

void from_json(const nlohmann::json& j, DroppedColumn& d) {
    d.name = j.at("name").get<std::string>();
    d.reason = j.at("reason").get<std::string>();
}

void to_json(nlohmann::json& j, const FEDiagnostics& f) {
    j = {{"levels", f.levels},
         {"absorbed_params", f.absorbed_params},
         {"connected_components", f.connected_components},
         {"singleton_groups", f.singleton_groups}};
}

void from_json(const nlohmann::json& j, FEDiagnostics& f) {
    f.levels = j.at("levels").get<std::vector<std::pair<std::string, long>>>();
    f.absorbed_params = j.at("absorbed_params").get<long>();
    f.connected_components = j.at("connected_components").get<long>();
    f.singleton_groups = j.at("singleton_groups").get<long>();
}

void to_json(nlohmann::json& j, const FitResult& f) {
    j = {{"coefficients", f.coefficients},
         {"dropped_columns", f.dropped_columns},
         {"n_obs", f.n_obs},
         {"df_residual", f.df_residual},
         {"sigma2", f.sigma2},
         {"r2_overall", f.r2_overall},
         {"adj_r2", f.adj_r2},
         {"r2_within", f.r2_within},
         {"robust_se", f.robust_se},
         {"fe", f.fe},
         {"residuals", f.residuals},
         {"demean_iterations", f.demean_iterations},
         {"demean_last_change", f.demean_last_change}};
}

void from_json(const nlohmann::json& j, FitResult& f) {
    f.coefficients = j.at("coefficients").get<std::vector<CoefficientStat>>();
    f.dropped_columns = j.at("dropped_columns").get<std::vector<DroppedColumn>>();
    f.n_obs = j.at("n_obs").get<long>();
    f.df_residual = j.at("df_residual").get<long>();
    f.sigma2 = j.at("sigma2").get<double>();
    f.r2_overall = j.at("r2_overall").get<double>();
    f.adj_r2 = j.at("adj_r2").get<double>();
    f.r2_within = j.at("r2_within").get<double>();
    f.robust_se = j.at("robust_se").get<bool>();
    f.fe = j.at("fe").get<FEDiagnostics>();
    f.residuals = j.at("residuals").get<std::vector<double>>();
    f.demean_iterations = j.at("demean_iterations").get<int>();
    f.demean_last_change = j.at("demean_last_change").get<double>();
}

nlohmann::json export_results(const FitResult& fit, const ModelSpec& spec) {
    return {{"tool_version", kToolVersion}, {"spec", spec}, {"fit", fit}};
}

FitResult import_fit(const nlohmann::json& record) {
    return record.at("fit").get<FitResult>();
}

ModelSpec import_spec(const nlohmann::json& record) {
    return record.at("spec").get<ModelSpec>();
}

}  // namespace airfare
