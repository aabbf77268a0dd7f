#pragma once

// Reads the comma-separated fixtures under tests/fixtures.

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "domstab/fitting.hpp"
#include "domstab/models.hpp"

namespace fixtures {

struct Row {
    std::map<std::string, std::string> cells;

    const std::string& text(const std::string& col) const {
        auto it = cells.find(col);
        if (it == cells.end()) throw std::out_of_range("no column " + col);
        return it->second;
    }
    double num(const std::string& col) const { return std::stod(text(col)); }
};

struct Table {
    std::vector<std::string> header;
    std::vector<Row> rows;

    const Row& subject(const std::string& id) const {
        for (const auto& r : rows)
            if (r.text("subject") == id) return r;
        throw std::out_of_range("no subject " + id);
    }
};

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline Table load(const std::string& name) {
    std::ifstream in(std::string(DOMSTAB_FIXTURES) + "/" + name);
    if (!in) throw std::runtime_error("missing fixture " + name);
    Table t;
    std::string line;
    std::getline(in, line);
    t.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split(line);
        Row r;
        for (std::size_t i = 0; i < t.header.size(); ++i) r.cells[t.header[i]] = i < cells.size() ? cells[i] : "";
        t.rows.push_back(std::move(r));
    }
    return t;
}

// Printed parameter rows as ModelParams. Tables list logistic parameters as
// K, r, a; the library order is K, a, r.
inline domstab::ModelParams params_from(domstab::ModelKind kind, const Row& r) {
    using domstab::ModelKind;
    switch (kind) {
    case ModelKind::Linear: return domstab::linear(r.num("a"), r.num("b"));
    case ModelKind::Logistic: return domstab::logistic(r.num("K"), r.num("a"), r.num("r"));
    case ModelKind::LogisticSine: return domstab::logistic_sine(r.num("K"), r.num("a"), r.num("r"));
    case ModelKind::LinearQuadratic:
        return domstab::linear_quadratic(r.num("a"), r.num("b"), r.num("c"), r.num("d"), r.num("e"));
    case ModelKind::QuadraticQuadratic:
        return domstab::quadratic_quadratic(r.num("a"), r.num("b"), r.num("c"), r.num("d"), r.num("e"), r.num("f"));
    }
    throw std::logic_error("kind");
}

inline std::vector<double> std_errors_from(domstab::ModelKind kind, const Row& r) {
    std::vector<double> out;
    for (auto name : domstab::parameter_names(kind)) out.push_back(r.num("se_" + std::string(name)));
    return out;
}

inline const char* table_for(domstab::ModelKind kind) {
    using domstab::ModelKind;
    switch (kind) {
    case ModelKind::Linear: return "table_s4_linear.csv";
    case ModelKind::Logistic: return "table_s2_logistic.csv";
    case ModelKind::LogisticSine: return "table_s3_logistic_sine.csv";
    case ModelKind::LinearQuadratic: return "table_s5_lq.csv";
    case ModelKind::QuadraticQuadratic: return "table_s6_qq.csv";
    }
    return "";
}

/// A fit carrying a printed table row as if it had been estimated.
inline domstab::ModelFit printed_fit(domstab::ModelKind kind, const Row& row) {
    using namespace domstab;
    ModelFit f;
    f.params = params_from(kind, row);
    f.std_errors = std_errors_from(kind, row);
    if (kind == ModelKind::Linear) {
        f.pearson_r = row.num("R");
        f.r2 = row.num("R") * row.num("R");
    } else {
        f.r2 = row.num("r2");
    }
    if (is_piecewise(kind)) f.derived = derived_params(f.params);
    return f;
}

} // namespace fixtures
