#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "airfare/core.hpp"

namespace airfare {

/// Drop tallies of the sample-selection pipeline. Consistency invariant:
/// rows_read - (rows_read - rows_after_min_fare) - dropped_international
/// - dropped_airport_filter == final_count.
struct SelectionReport {
    long rows_read = 0;
    long rows_after_min_fare = 0;
    long rows_dropped_international = 0;
    long rows_dropped_airport_filter = 0;
    long final_count = 0;

    bool consistent() const {
        return rows_read >= rows_after_min_fare &&
               rows_after_min_fare - rows_dropped_international -
                       rows_dropped_airport_filter ==
                   final_count;
    }

    /// "key value" lines, one per field, stable order.
    std::string to_text() const;

    bool operator==(const SelectionReport&) const = default;
};

/// One rejected input row: 1-based line number plus what was wrong with it.
struct RowError {
    long line = 0;
    std::string message;

    bool operator==(const RowError&) const = default;
};

/// Output of parse_quotes: accepted rows, rejected rows, and the data-row
/// count (header excluded).
struct ParseOutcome {
    std::vector<FareQuote> quotes;
    std::vector<RowError> row_errors;
    long rows_read = 0;
};

/// Expected header fields of a raw quote file, in canonical order.
extern const std::vector<std::string> kQuoteFileColumns;

/**
 * @brief Parses a delimited quote file. The header row is mandatory and must
 * contain exactly the schema columns (any order). Malformed rows are reported
 * with their line numbers and skipped; a bad header throws ParseError.
 */
ParseOutcome parse_quotes(std::istream& input, char delimiter = ',');

/// Convenience overload opening `path`; throws IoError if unreadable.
ParseOutcome parse_quotes_file(const std::string& path, char delimiter = ',');

/**
 * @brief Keeps, per (airline, airport pair, quotation date, departure date)
 * group, only the minimum-price quote. Ties keep the first occurrence in
 * input order. Output is in canonical order: sorted by airline, origin,
 * destination, quotation date, departure date.
 */
std::vector<FareQuote> select_min_fare(const std::vector<FareQuote>& quotes);

/**
 * @brief Drops international rows, then rows whose origin is outside
 * `origin_airports` (empty list keeps every origin). Tallies each drop reason
 * into the returned report; rows_read / rows_after_min_fare are left at the
 * filter-stage values for the caller to overwrite with pipeline totals.
 */
std::pair<std::vector<FareQuote>, SelectionReport> filter_sample(
    const std::vector<FareQuote>& quotes,
    const std::vector<std::string>& origin_airports);

/**
 * @brief Full selection pipeline on parsed rows: min-fare selection then
 * sample filters, with a complete SelectionReport.
 */
std::pair<std::vector<FareQuote>, SelectionReport> select_sample(
    const ParseOutcome& parsed, const std::vector<std::string>& origin_airports);

/// Writes quotes in the canonical file schema (shortest round-trip numbers).
void write_quotes(std::ostream& out, const std::vector<FareQuote>& quotes,
                  char delimiter = ',');
void write_quotes_file(const std::string& path, const std::vector<FareQuote>& quotes,
                       char delimiter = ',');

}  // namespace airfare
