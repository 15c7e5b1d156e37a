#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ellcop/copula.hpp"
#include "ellcop/linalg.hpp"

namespace ellcop {

enum class IngestFormat { Uniform, Ranks };

struct IngestResult {
    PseudoSample sample;
    int clamped = 0;  // Uniform format: entries outside (0,1) clamped into range
    bool had_header = false;
};

// Reads an n x d numeric CSV into a pseudo-sample. Uniform format validates
// entries against (0,1) and clamps strays to [1e-12, 1-1e-12], counting them;
// Ranks format converts raw columns to u = rank/(n+1) with average-rank ties.
// A non-numeric first row is treated as a header.
IngestResult ingest_csv(const std::string& path, IngestFormat format);

// Square symmetric matrix CSV (no header). Asymmetry beyond 1e-12 is an error;
// smaller asymmetry is averaged away.
SymMatrix read_matrix_csv(const std::string& path);

void write_matrix_csv(const std::string& path, const SymMatrix& m);
void write_sample_csv(const std::string& path, const PseudoSample& sample);

// Writes content to a sibling temp file, then renames onto path, so failed
// runs never leave a partial output behind.
void write_text_file_atomic(const std::string& path, const std::string& content);

// Nearest-rank percentile: value at 1-based index ceil(p/100 * N) of the
// sorted vector. Requires 0 < p <= 100 and a non-empty vector.
double percentile_nearest_rank(std::vector<double> values, double p);

// Small JSON document tree. Doubles are serialized with 17 significant
// digits so results round-trip exactly; non-finite values become null.
class Json {
public:
    Json() : kind_(Kind::Null) {}
    Json(bool b) : kind_(Kind::Bool), bool_(b) {}
    Json(int v) : kind_(Kind::Int), int_(v) {}
    Json(long v) : kind_(Kind::Int), int_(v) {}
    Json(long long v) : kind_(Kind::Int), int_(v) {}
    Json(unsigned int v) : kind_(Kind::Int), int_(v) {}
    Json(unsigned long v) : kind_(Kind::Int), int_(static_cast<long long>(v)) {}
    Json(unsigned long long v) : kind_(Kind::Int), int_(static_cast<long long>(v)) {}
    Json(double v) : kind_(Kind::Double), double_(v) {}
    Json(const char* s) : kind_(Kind::String), str_(s) {}
    Json(std::string s) : kind_(Kind::String), str_(std::move(s)) {}

    static Json object();
    static Json array();

    // Object insertion preserves key order; setting an existing key replaces.
    Json& set(const std::string& key, Json value);
    Json& push(Json value);

    bool is_object() const { return kind_ == Kind::Object; }
    bool is_array() const { return kind_ == Kind::Array; }

    std::string dump(int indent = 2) const;

private:
    enum class Kind { Null, Bool, Int, Double, String, Array, Object };
    void dump_to(std::string& out, int indent, int depth) const;

    Kind kind_;
    bool bool_ = false;
    long long int_ = 0;
    double double_ = 0.0;
    std::string str_;
    std::vector<Json> items_;                                  // Array
    std::vector<std::pair<std::string, Json>> members_;        // Object
};

// Formats one double the way every CSV and JSON emitter here does: %.17g.
std::string format_double(double v);

}  // namespace ellcop
