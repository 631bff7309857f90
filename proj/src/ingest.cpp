#include "airfare/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>
#include <unordered_map>

namespace airfare {

const std::vector<std::string> kQuoteFileColumns = {
    "airline", "origin",         "destination", "quotation_date",
    "departure_date", "stops",   "price",       "is_domestic"};

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, delimiter)) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == delimiter) {
        fields.emplace_back();
    }
    return fields;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

double parse_price(const std::string& text) {
    double value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ParseError("bad price '" + text + "'");
    }
    return value;
}

int parse_stops(const std::string& text) {
    int value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ParseError("bad stops '" + text + "'");
    }
    return value;
}

bool parse_bool(const std::string& text) {
    std::string lower = text;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    if (lower == "1" || lower == "true") return true;
    if (lower == "0" || lower == "false") return false;
    throw ParseError("bad boolean '" + text + "'");
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

ParseOutcome parse_quotes(std::istream& input, char delimiter) {
    std::string line;
    if (!std::getline(input, line)) {
        throw ParseError("quote file is empty; header row required");
    }
    const std::vector<std::string> header = split_line(strip_cr(line), delimiter);

    // Map schema column -> position in this file.
    std::unordered_map<std::string, size_t> position;
    for (size_t i = 0; i < header.size(); ++i) {
        if (!position.emplace(header[i], i).second) {
            throw ParseError("duplicate column '" + header[i] + "' in header");
        }
    }
    std::vector<size_t> col(kQuoteFileColumns.size());
    for (size_t i = 0; i < kQuoteFileColumns.size(); ++i) {
        auto it = position.find(kQuoteFileColumns[i]);
        if (it == position.end()) {
            throw ParseError("missing column '" + kQuoteFileColumns[i] + "' in header");
        }
        col[i] = it->second;
    }
    for (const auto& [name, pos] : position) {
        (void)pos;
        if (std::find(kQuoteFileColumns.begin(), kQuoteFileColumns.end(), name) ==
            kQuoteFileColumns.end()) {
            throw ParseError("unknown column '" + name + "' in header");
        }
    }

    ParseOutcome outcome;
    long line_number = 1;
    while (std::getline(input, line)) {
        ++line_number;
        line = strip_cr(line);
        if (line.empty()) continue;
        ++outcome.rows_read;
        const std::vector<std::string> fields = split_line(line, delimiter);
        if (fields.size() != header.size()) {
            outcome.row_errors.push_back(
                {line_number, "expected " + std::to_string(header.size()) +
                                  " fields, got " + std::to_string(fields.size())});
            continue;
        }
        try {
            FareQuote quote;
            quote.airline = fields[col[0]];
            quote.origin_airport = fields[col[1]];
            quote.destination_airport = fields[col[2]];
            quote.quotation_date = Date::parse(fields[col[3]]);
            quote.departure_date = Date::parse(fields[col[4]]);
            quote.stops = parse_stops(fields[col[5]]);
            quote.price = parse_price(fields[col[6]]);
            quote.is_domestic = parse_bool(fields[col[7]]);
            quote.validate();
            outcome.quotes.push_back(std::move(quote));
        } catch (const Error& e) {
            outcome.row_errors.push_back({line_number, e.what()});
        }
    }
    return outcome;
}

ParseOutcome parse_quotes_file(const std::string& path, char delimiter) {
    std::ifstream input(path);
    if (!input) {
        throw IoError("cannot open quote file '" + path + "'");
    }
    return parse_quotes(input, delimiter);
}

namespace {

using GroupKey = std::tuple<std::string, std::string, std::string, Date, Date>;

GroupKey group_key(const FareQuote& q) {
    return {q.airline, q.origin_airport, q.destination_airport, q.quotation_date,
            q.departure_date};
}

}  // namespace

std::vector<FareQuote> select_min_fare(const std::vector<FareQuote>& quotes) {
    // Map preserves first-occurrence tie-break: strictly smaller price replaces.
    std::map<GroupKey, const FareQuote*> best;
    for (const auto& quote : quotes) {
        auto [it, inserted] = best.emplace(group_key(quote), &quote);
        if (!inserted && quote.price < it->second->price) {
            it->second = &quote;
        }
    }
    std::vector<FareQuote> selected;
    selected.reserve(best.size());
    for (const auto& [key, quote] : best) {
        (void)key;
        selected.push_back(*quote);
    }
    // std::map iterates in key order, which is the canonical output order.
    return selected;
}

std::pair<std::vector<FareQuote>, SelectionReport> filter_sample(
    const std::vector<FareQuote>& quotes,
    const std::vector<std::string>& origin_airports) {
    SelectionReport report;
    report.rows_read = long(quotes.size());
    report.rows_after_min_fare = long(quotes.size());
    std::vector<FareQuote> kept;
    kept.reserve(quotes.size());
    for (const auto& quote : quotes) {
        if (!quote.is_domestic) {
            ++report.rows_dropped_international;
            continue;
        }
        if (!origin_airports.empty() &&
            std::find(origin_airports.begin(), origin_airports.end(),
                      quote.origin_airport) == origin_airports.end()) {
            ++report.rows_dropped_airport_filter;
            continue;
        }
        kept.push_back(quote);
    }
    report.final_count = long(kept.size());
    return {std::move(kept), report};
}

std::pair<std::vector<FareQuote>, SelectionReport> select_sample(
    const ParseOutcome& parsed, const std::vector<std::string>& origin_airports) {
    std::vector<FareQuote> selected = select_min_fare(parsed.quotes);
    auto [kept, report] = filter_sample(selected, origin_airports);
    report.rows_read = parsed.rows_read;
    report.rows_after_min_fare = long(selected.size());
    return {std::move(kept), report};
}

std::string SelectionReport::to_text() const {
    std::ostringstream out;
    out << "rows_read " << rows_read << "\n"
        << "rows_after_min_fare " << rows_after_min_fare << "\n"
        << "rows_dropped_international " << rows_dropped_international << "\n"
        << "rows_dropped_airport_filter " << rows_dropped_airport_filter << "\n"
        << "final_count " << final_count << "\n";
    return out.str();
}

void write_quotes(std::ostream& out, const std::vector<FareQuote>& quotes,
                  char delimiter) {
    const char d = delimiter;
    for (size_t i = 0; i < kQuoteFileColumns.size(); ++i) {
        if (i) out << d;
        out << kQuoteFileColumns[i];
    }
    out << "\n";
    for (const auto& q : quotes) {
        out << q.airline << d << q.origin_airport << d << q.destination_airport << d
            << q.quotation_date.to_string() << d << q.departure_date.to_string() << d
            << q.stops << d << format_double(q.price) << d << (q.is_domestic ? 1 : 0)
            << "\n";
    }
}

void write_quotes_file(const std::string& path, const std::vector<FareQuote>& quotes,
                       char delimiter) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write quote file '" + path + "'");
    }
    write_quotes(out, quotes, delimiter);
}

}  // namespace airfare
