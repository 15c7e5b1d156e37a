#include "ellcop/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

namespace ellcop {

namespace {

struct RawTable {
    std::vector<std::vector<double>> rows;
    bool had_header = false;
};

std::string trimmed(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_field(const std::string& field, double* out) {
    const std::string t = trimmed(field);
    if (t.empty()) return false;
    const char* begin = t.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + t.size()) return false;
    *out = v;
    return true;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

RawTable read_numeric_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EmptyInput("cannot open '" + path + "' for reading");
    RawTable table;
    std::string line;
    int file_row = 0;
    int width = -1;
    while (std::getline(in, line)) {
        ++file_row;
        if (trimmed(line).empty()) continue;  // blank lines (e.g. trailing newline)
        const std::vector<std::string> fields = split_csv_line(line);
        std::vector<double> row(fields.size());
        bool all_numeric = true;
        int bad_col = 0;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (!parse_field(fields[c], &row[c])) {
                all_numeric = false;
                bad_col = static_cast<int>(c) + 1;
                break;
            }
        }
        if (!all_numeric) {
            if (table.rows.empty() && !table.had_header) {
                table.had_header = true;  // non-numeric first row is a header
                continue;
            }
            throw ParseError(file_row, bad_col, "field is not numeric");
        }
        for (double v : row)
            if (!std::isfinite(v)) {
                const int col =
                    static_cast<int>(std::find_if(row.begin(), row.end(),
                                                  [](double x) { return !std::isfinite(x); }) -
                                     row.begin()) +
                    1;
                throw ParseError(file_row, col, "field is not finite");
            }
        if (width < 0)
            width = static_cast<int>(row.size());
        else if (static_cast<int>(row.size()) != width)
            throw DimensionError("row " + std::to_string(file_row) + " has " +
                                 std::to_string(row.size()) + " columns, expected " +
                                 std::to_string(width));
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty()) throw EmptyInput("'" + path + "' contains no data rows");
    return table;
}

std::vector<double> ranks_to_uniforms(const std::vector<std::vector<double>>& rows, int col) {
    const int n = static_cast<int>(rows.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return rows[a][col] < rows[b][col]; });
    std::vector<double> u(n);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && rows[order[j + 1]][col] == rows[order[i]][col]) ++j;
        const double avg_rank = 0.5 * (i + j) + 1.0;  // 1-based average rank of the tie block
        for (int k = i; k <= j; ++k) u[order[k]] = avg_rank / (n + 1.0);
        i = j + 1;
    }
    return u;
}

}  // namespace

IngestResult ingest_csv(const std::string& path, IngestFormat format) {
    RawTable table = read_numeric_table(path);
    const int n = static_cast<int>(table.rows.size());
    const int d = static_cast<int>(table.rows[0].size());

    std::vector<double> u(static_cast<std::size_t>(n) * d);
    int clamped = 0;
    if (format == IngestFormat::Uniform) {
        for (int t = 0; t < n; ++t)
            for (int i = 0; i < d; ++i) {
                double v = table.rows[t][i];
                if (v <= 0.0) {
                    v = 1e-12;
                    ++clamped;
                } else if (v >= 1.0) {
                    v = 1.0 - 1e-12;
                    ++clamped;
                }
                u[static_cast<std::size_t>(t) * d + i] = v;
            }
    } else {
        for (int i = 0; i < d; ++i) {
            const std::vector<double> col = ranks_to_uniforms(table.rows, i);
            for (int t = 0; t < n; ++t) u[static_cast<std::size_t>(t) * d + i] = col[t];
        }
    }
    return IngestResult{PseudoSample(n, d, std::move(u)), clamped, table.had_header};
}

SymMatrix read_matrix_csv(const std::string& path) {
    RawTable table = read_numeric_table(path);
    const int n = static_cast<int>(table.rows.size());
    if (static_cast<int>(table.rows[0].size()) != n)
        throw DimensionError("matrix file must be square, got " + std::to_string(n) + "x" +
                             std::to_string(table.rows[0].size()));
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) {
        m.set(i, i, table.rows[i][i]);
        for (int j = i + 1; j < n; ++j) {
            const double a = table.rows[i][j], b = table.rows[j][i];
            if (std::fabs(a - b) > 1e-12)
                throw DimensionError("matrix is not symmetric at (" + std::to_string(i + 1) + "," +
                                     std::to_string(j + 1) + ")");
            m.set(i, j, a == b ? a : 0.5 * (a + b));
        }
    }
    return m;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw Error("cannot open '" + tmp + "' for writing");
        out << content;
        if (!out.good()) throw Error("write to '" + tmp + "' failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw Error("cannot rename '" + tmp + "' to '" + path + "'");
    }
}

void write_matrix_csv(const std::string& path, const SymMatrix& m) {
    std::string out;
    for (int i = 0; i < m.dim(); ++i) {
        for (int j = 0; j < m.dim(); ++j) {
            if (j) out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    write_text_file_atomic(path, out);
}

void write_sample_csv(const std::string& path, const PseudoSample& sample) {
    std::string out;
    for (int t = 0; t < sample.n; ++t) {
        for (int i = 0; i < sample.d; ++i) {
            if (i) out += ',';
            out += format_double(sample.at(t, i));
        }
        out += '\n';
    }
    write_text_file_atomic(path, out);
}

double percentile_nearest_rank(std::vector<double> values, double p) {
    if (values.empty()) throw EmptyInput("percentile of an empty vector");
    if (!(p > 0.0) || !(p <= 100.0)) throw DomainError("percentile level must lie in (0, 100]");
    std::sort(values.begin(), values.end());
    const auto n = static_cast<long long>(values.size());
    long long idx = static_cast<long long>(std::ceil(p / 100.0 * static_cast<double>(n)));
    idx = std::max(1LL, std::min(idx, n));
    return values[static_cast<std::size_t>(idx - 1)];
}

Json Json::object() {
    Json j;
    j.kind_ = Kind::Object;
    return j;
}

Json Json::array() {
    Json j;
    j.kind_ = Kind::Array;
    return j;
}

Json& Json::set(const std::string& key, Json value) {
    if (kind_ != Kind::Object) throw Error("Json::set on a non-object");
    for (auto& [k, v] : members_)
        if (k == key) {
            v = std::move(value);
            return *this;
        }
    members_.emplace_back(key, std::move(value));
    return *this;
}

Json& Json::push(Json value) {
    if (kind_ != Kind::Array) throw Error("Json::push on a non-array");
    items_.push_back(std::move(value));
    return *this;
}

namespace {

void append_escaped(std::string& out, const std::string& s) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

}  // namespace

void Json::dump_to(std::string& out, int indent, int depth) const {
    const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent) * depth, ' ');
    const char* nl = indent > 0 ? "\n" : "";
    switch (kind_) {
        case Kind::Null: out += "null"; break;
        case Kind::Bool: out += bool_ ? "true" : "false"; break;
        case Kind::Int: out += std::to_string(int_); break;
        case Kind::Double:
            if (std::isfinite(double_))
                out += format_double(double_);
            else
                out += "null";
            break;
        case Kind::String: append_escaped(out, str_); break;
        case Kind::Array: {
            if (items_.empty()) {
                out += "[]";
                break;
            }
            out += '[';
            out += nl;
            for (std::size_t i = 0; i < items_.size(); ++i) {
                out += pad;
                items_[i].dump_to(out, indent, depth + 1);
                if (i + 1 < items_.size()) out += ',';
                out += nl;
            }
            out += close_pad;
            out += ']';
            break;
        }
        case Kind::Object: {
            if (members_.empty()) {
                out += "{}";
                break;
            }
            out += '{';
            out += nl;
            for (std::size_t i = 0; i < members_.size(); ++i) {
                out += pad;
                append_escaped(out, members_[i].first);
                out += indent > 0 ? ": " : ":";
                members_[i].second.dump_to(out, indent, depth + 1);
                if (i + 1 < members_.size()) out += ',';
                out += nl;
            }
            out += close_pad;
            out += '}';
            break;
        }
    }
}

std::string Json::dump(int indent) const {
    std::string out;
    dump_to(out, indent, 0);
    return out;
}

}  // namespace ellcop
