#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmat/targets.hpp"

namespace qmat {

// Shortest exact decimal form: 17 significant digits round-trip for doubles.
inline std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

// Minimal CSV emitter. Fields holding separators, quotes, or newlines are
// quoted with doubled inner quotes; rows end with a bare LF so output bytes
// do not depend on the platform.
class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
    }

    void row(const std::vector<std::string>& fields) {
        for (size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << escape(fields[i]);
        }
        out_ << '\n';
    }

    void numeric_row(const std::vector<double>& values) {
        for (size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ',';
            out_ << format_full(values[i]);
        }
        out_ << '\n';
    }

    void close() { out_.close(); }

  private:
    static std::string escape(const std::string& f) {
        if (f.find_first_of(",\"\n\r") == std::string::npos) return f;
        std::string q = "\"";
        for (char c : f) {
            if (c == '"') q += "\"\"";
            else q += c;
        }
        q += "\"";
        return q;
    }

    std::ofstream out_;
};

// One row per (time, position) sample.
inline void write_density_csv(const std::string& path, const DensityTriple& d) {
    CsvWriter w(path);
    w.row({"t", "x", "rho", "mom", "en"});
    for (size_t r = 0; r < d.times.size(); ++r)
        for (int q = 0; q < d.x.n; ++q)
            w.numeric_row({d.times[r], d.x.point(q), d.rho(r, q), d.mom(r, q), d.en(r, q)});
    w.close();
}

// Parallel named columns of equal length.
inline void write_series_csv(const std::string& path, const std::vector<std::string>& names,
                             const std::vector<std::vector<double>>& columns) {
    if (names.size() != columns.size())
        throw std::invalid_argument("write_series_csv: name/column count mismatch");
    for (const auto& c : columns)
        if (c.size() != columns.front().size())
            throw std::invalid_argument("write_series_csv: ragged columns");
    CsvWriter w(path);
    w.row(names);
    const size_t n = columns.empty() ? 0 : columns.front().size();
    for (size_t r = 0; r < n; ++r) {
        std::vector<double> vals;
        vals.reserve(columns.size());
        for (const auto& c : columns) vals.push_back(c[r]);
        w.numeric_row(vals);
    }
    w.close();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_text_file: cannot open " + path);
    out << content;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_text_file: cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

} // namespace qmat
