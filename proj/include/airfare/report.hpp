#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "airfare/core.hpp"

namespace airfare {

inline constexpr const char* kToolVersion = "1.0.0";

/// Table shape: one column group (coefficient + standard error) per fit,
/// regressor rows in display order, optional footer statistics and notes.
struct TableLayout {
    std::vector<std::string> column_groups;  // headings, one per fit
    std::vector<std::string> rows;           // regressor names, display order
    bool footer_observations = true;
    bool footer_adj_r2 = true;
    std::vector<std::string> notes;  // verbatim lines under the table
};

enum class TableFormat { text, delim, markup };

TableFormat parse_format(const std::string& text);
const char* to_string(TableFormat format);

/**
 * @brief Renders fitted models side by side. Coefficients print with three
 * decimals and their star suffix, the standard error sits in the adjacent
 * column, and the footer carries observation counts and adjusted R-squared.
 * Output bytes are a pure function of the inputs.
 *
 * A layout row present in no fit at all raises RenderError; a row missing
 * from only some fits renders blank cells there.
 */
std::string render_table(const std::vector<FitResult>& fits,
                         const TableLayout& layout, TableFormat format);

/// Layout with one column group per fit (headings from `group_labels`), rows
/// in first-appearance order across the fits, and the standard notes lines.
TableLayout default_layout(const std::vector<FitResult>& fits,
                           const std::vector<std::string>& group_labels);

/// Fixed three-decimal display used in tables; negative zero normalizes to
/// "0.000".
std::string format_3d(double value);

/**
 * @brief Machine-readable record of one fit: tool version, the model spec
 * that produced it, every statistic, diagnostics, dropped columns and the
 * residual vector. Numbers survive a round-trip bit-exactly.
 */
nlohmann::json export_results(const FitResult& fit, const ModelSpec& spec);

/// Inverse of export_results for the fit part.
FitResult import_fit(const nlohmann::json& record);

/// Inverse of export_results for the model-spec echo.
ModelSpec import_spec(const nlohmann::json& record);

// JSON bindings (nlohmann ADL) for the domain types that appear in records
// and configuration files.
void to_json(nlohmann::json& j, const Date& d);
void from_json(const nlohmann::json& j, Date& d);
void to_json(nlohmann::json& j, const HolidaySpec& h);
void from_json(const nlohmann::json& j, HolidaySpec& h);
void to_json(nlohmann::json& j, const EventRange& e);
void from_json(const nlohmann::json& j, EventRange& e);
void to_json(nlohmann::json& j, const HolidayWindowConfig& c);
void from_json(const nlohmann::json& j, HolidayWindowConfig& c);
void to_json(nlohmann::json& j, const ModelSpec& s);
void from_json(const nlohmann::json& j, ModelSpec& s);
void to_json(nlohmann::json& j, const CoefficientStat& c);
void from_json(const nlohmann::json& j, CoefficientStat& c);
void to_json(nlohmann::json& j, const DroppedColumn& d);
void from_json(const nlohmann::json& j, DroppedColumn& d);
void to_json(nlohmann::json& j, const FEDiagnostics& f);
void from_json(const nlohmann::json& j, FEDiagnostics& f);
void to_json(nlohmann::json& j, const FitResult& f);
void from_json(const nlohmann::json& j, FitResult& f);

}  // namespace airfare
