#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mlhub/errors.hpp"

namespace mlhub::arff {

enum class Kind {
    Numeric,
    Nominal,
    Text,  // "string" attributes
    Date,
};

struct AttributeDecl {
    std::string name;
    Kind kind = Kind::Numeric;
    std::vector<std::string> levels;  // Nominal only; declared order is significant
    std::string date_format;          // Date only; stored verbatim, never interpreted

    bool operator==(const AttributeDecl&) const = default;
};

struct MissingValue {
    bool operator==(const MissingValue&) const = default;
};

/// Index into the column's declared level list.
struct NominalValue {
    std::int32_t index = 0;
    bool operator==(const NominalValue&) const = default;
};

/// A single cell. Dates are carried as raw strings.
using Value = std::variant<MissingValue, double, std::string, NominalValue>;

inline bool is_missing(const Value& v) { return std::holds_alternative<MissingValue>(v); }

struct Relation {
    std::string name;
    std::vector<AttributeDecl> attributes;
    std::vector<std::vector<Value>> rows;

    std::size_t n_rows() const { return rows.size(); }
    std::size_t n_attributes() const { return attributes.size(); }

    /// Count of missing cells over the whole data section.
    std::size_t missing_count() const;

    /// Index of the attribute with this (case-sensitive) name, or -1.
    std::ptrdiff_t attribute_index(std::string_view attr_name) const;

    bool operator==(const Relation&) const = default;
};

class ArffError : public Error {
  public:
    enum class Code {
        Syntax,
        Type,                // datum incompatible with its column's kind
        DuplicateAttribute,  // repeated attribute name
        SparseUnsupported,   // `{i v, ...}` data rows
    };

    ArffError(Code code, std::size_t line, std::size_t column, const std::string& message);

    Code code() const { return code_; }
    std::size_t line() const { return line_; }      // 1-based
    std::size_t column() const { return column_; }  // 1-based

  private:
    Code code_;
    std::size_t line_;
    std::size_t column_;
};

/// Parse an ARFF document. Accepts `\n` and `\r\n` line endings, `%` comments,
/// case-insensitive keywords, single- or double-quoted tokens and unquoted `?`
/// for missing values. Dense rows only. Throws ArffError with the position of
/// the first problem.
Relation parse(std::string_view text);

/// Serialize a relation. The output reparses to an equal relation: numerics use
/// the shortest representation that round-trips a 64-bit float, and any token
/// that needs it is single-quoted with backslash escapes.
std::string write(const Relation& rel);

/// True if `write` would quote this token.
bool needs_quoting(std::string_view token);

/// Canonical shortest round-trip formatting for a double.
std::string format_double(double v);

}  // namespace mlhub::arff
