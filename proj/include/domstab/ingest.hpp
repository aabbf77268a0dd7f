#pragma once

// Abundance-table parsing and per-subject time series assembly.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "domstab/errors.hpp"

namespace domstab {

using Count = std::uint64_t;

/// Species x samples matrix of read counts. Row-major: counts[species][sample].
struct AbundanceTable {
    std::vector<std::string> species_ids;
    std::vector<std::string> sample_ids;
    std::vector<std::vector<Count>> counts;

    std::size_t species_count() const noexcept { return species_ids.size(); }
    std::size_t sample_count() const noexcept { return sample_ids.size(); }
};

enum class TableFormat { Auto, Comma, Tab };

namespace detail {

inline void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

inline std::vector<std::string> split_line(std::string_view line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

inline void require_unique(const std::vector<std::string>& ids) {
    std::unordered_set<std::string> seen;
    for (const auto& id : ids)
        if (!seen.insert(id).second) throw DuplicateIdError(id);
}

} // namespace detail

inline char delimiter_for(TableFormat format, std::string_view header) {
    switch (format) {
    case TableFormat::Comma: return ',';
    case TableFormat::Tab: return '\t';
    case TableFormat::Auto: break;
    }
    return header.find('\t') != std::string_view::npos ? '\t' : ',';
}

/// Reads a delimiter-separated table: header row of sample ids (first cell
/// labels the species column), then one row per species. Row indices in
/// errors count the header as row 0.
inline AbundanceTable parse_table(std::istream& in, TableFormat format = TableFormat::Auto) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(0, "empty input");
    detail::strip_cr(line);
    const char delim = delimiter_for(format, line);

    AbundanceTable table;
    auto header = detail::split_line(line, delim);
    if (header.size() < 2) throw ParseError(0, "header needs a species column and at least one sample");
    for (std::size_t j = 1; j < header.size(); ++j) table.sample_ids.emplace_back(detail::trim(header[j]));
    detail::require_unique(table.sample_ids);

    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        detail::strip_cr(line);
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_line(line, delim);
        if (cells.size() != header.size())
            throw ParseError(row, "expected " + std::to_string(header.size()) + " cells, found " +
                                      std::to_string(cells.size()));
        table.species_ids.emplace_back(detail::trim(cells[0]));
        std::vector<Count> values(cells.size() - 1);
        for (std::size_t j = 1; j < cells.size(); ++j) {
            auto cell = detail::trim(cells[j]);
            if (cell.empty()) throw ValueError(row, j, "empty cell");
            if (cell.front() == '-') throw ValueError(row, j, "negative count '" + std::string(cell) + "'");
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), values[j - 1]);
            if (ec != std::errc{} || ptr != cell.data() + cell.size())
                throw ValueError(row, j, "not a non-negative integer: '" + std::string(cell) + "'");
        }
        table.counts.push_back(std::move(values));
    }
    detail::require_unique(table.species_ids);
    return table;
}

inline AbundanceTable parse_table(std::string_view text, TableFormat format = TableFormat::Auto) {
    std::istringstream in{std::string(text)};
    return parse_table(in, format);
}

inline void emit_table(std::ostream& out, const AbundanceTable& table, char delim = ',',
                       std::string_view corner = "species") {
    out << corner;
    for (const auto& s : table.sample_ids) out << delim << s;
    out << '\n';
    for (std::size_t i = 0; i < table.species_count(); ++i) {
        out << table.species_ids[i];
        for (auto c : table.counts[i]) out << delim << c;
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Subjects

enum class DateFormat { MMDDYY, YYMMDD, YYYYMMDD, None };

/// How a sample id decomposes into subject and time token. The id is split at
/// the last occurrence of `separator`; the token after it must match `date`.
struct SampleIdRule {
    char separator = '_';
    DateFormat date = DateFormat::MMDDYY;

    /// Parses "<sep>:<format>", e.g. "_:MMDDYY" or "-:none".
    static SampleIdRule parse(std::string_view spec) {
        SampleIdRule rule;
        auto colon = spec.rfind(':');
        if (colon != 1) throw InputError("id rule must look like '<sep>:<format>', got '" + std::string(spec) + "'");
        rule.separator = spec[0];
        auto fmt = spec.substr(2);
        if (fmt == "MMDDYY") rule.date = DateFormat::MMDDYY;
        else if (fmt == "YYMMDD") rule.date = DateFormat::YYMMDD;
        else if (fmt == "YYYYMMDD") rule.date = DateFormat::YYYYMMDD;
        else if (fmt == "none") rule.date = DateFormat::None;
        else throw InputError("unknown date format in id rule: '" + std::string(fmt) + "'");
        return rule;
    }
};

struct ParsedSampleId {
    std::string subject;
    std::string sort_key; // lexicographic order == time order
};

inline ParsedSampleId parse_sample_id(std::string_view id, const SampleIdRule& rule) {
    auto pos = id.rfind(rule.separator);
    if (pos == std::string_view::npos || pos == 0 || pos + 1 == id.size()) throw IdRuleError(std::string(id));
    ParsedSampleId out{std::string(id.substr(0, pos)), std::string(id.substr(pos + 1))};
    const auto& tok = out.sort_key;
    auto all_digits = std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; });
    switch (rule.date) {
    case DateFormat::MMDDYY:
        if (tok.size() != 6 || !all_digits) throw IdRuleError(std::string(id));
        out.sort_key = tok.substr(4, 2) + tok.substr(0, 4);
        break;
    case DateFormat::YYMMDD:
        if (tok.size() != 6 || !all_digits) throw IdRuleError(std::string(id));
        break;
    case DateFormat::YYYYMMDD:
        if (tok.size() != 8 || !all_digits) throw IdRuleError(std::string(id));
        break;
    case DateFormat::None: out.sort_key.clear(); break;
    }
    return out;
}

/// Time-ordered samples of one subject over a fixed species roster.
struct SubjectSeries {
    std::string subject_id;
    std::vector<std::string> sample_ids;
    std::vector<std::string> species_ids;
    std::vector<std::vector<Count>> counts; // [species][time]

    std::size_t length() const noexcept { return sample_ids.size(); }
    std::size_t species_count() const noexcept { return species_ids.size(); }
    /// Stability needs at least one consecutive pair.
    bool analyzable() const noexcept { return length() >= 2; }

    std::vector<double> sample(std::size_t t) const {
        std::vector<double> v(species_count());
        for (std::size_t i = 0; i < species_count(); ++i) v[i] = static_cast<double>(counts[i][t]);
        return v;
    }

    Count species_total(std::size_t i) const {
        return std::accumulate(counts[i].begin(), counts[i].end(), Count{0});
    }
};

/// One series per subject, subjects in order of first appearance. Samples are
/// ordered by date token with ties kept in column order; the roster holds the
/// species with any nonzero count in that subject.
inline std::vector<SubjectSeries> split_subjects(const AbundanceTable& table, const SampleIdRule& rule = {}) {
    struct Column {
        std::size_t index;
        std::string key;
    };
    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<Column>> columns;
    for (std::size_t j = 0; j < table.sample_count(); ++j) {
        auto parsed = parse_sample_id(table.sample_ids[j], rule);
        auto [it, inserted] = columns.try_emplace(parsed.subject);
        if (inserted) order.push_back(parsed.subject);
        it->second.push_back({j, std::move(parsed.sort_key)});
    }

    std::vector<SubjectSeries> out;
    out.reserve(order.size());
    for (const auto& subject : order) {
        auto& cols = columns[subject];
        std::stable_sort(cols.begin(), cols.end(), [](const Column& a, const Column& b) { return a.key < b.key; });

        SubjectSeries s;
        s.subject_id = subject;
        for (const auto& c : cols) s.sample_ids.push_back(table.sample_ids[c.index]);
        for (std::size_t i = 0; i < table.species_count(); ++i) {
            std::vector<Count> row;
            row.reserve(cols.size());
            bool any = false;
            for (const auto& c : cols) {
                row.push_back(table.counts[i][c.index]);
                any = any || row.back() != 0;
            }
            if (!any) continue;
            s.species_ids.push_back(table.species_ids[i]);
            s.counts.push_back(std::move(row));
        }
        out.push_back(std::move(s));
    }
    return out;
}

/// Drops species whose summed reads over the subject are below `min_total`.
inline SubjectSeries filter_low_reads(const SubjectSeries& series, Count min_total) {
    SubjectSeries out;
    out.subject_id = series.subject_id;
    out.sample_ids = series.sample_ids;
    for (std::size_t i = 0; i < series.species_count(); ++i) {
        if (series.species_total(i) < min_total) continue;
        out.species_ids.push_back(series.species_ids[i]);
        out.counts.push_back(series.counts[i]);
    }
    if (out.species_ids.empty())
        throw EmptyRosterError("no species in subject " + series.subject_id + " reach " +
                               std::to_string(min_total) + " total reads");
    return out;
}

} // namespace domstab
