#include "mlhub/arff.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>
#include <optional>
#include <unordered_map>
#include <unordered_set>

namespace mlhub::arff {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_space(char c) { return c == ' ' || c == '\t'; }

struct Token {
    std::string text;
    bool quoted = false;
    std::size_t line = 0;
    std::size_t column = 0;
};

/// Character cursor with 1-based line/column tracking. Treats `\r\n` as `\n`.
class Cursor {
  public:
    explicit Cursor(std::string_view text)
        : text_(text) {
        // Skip a UTF-8 BOM if present.
        if (text_.substr(0, 3) == "\xef\xbb\xbf") {
            pos_ = 3;
        }
    }

    bool eof() const { return pos_ >= text_.size(); }
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

    char peek() const { return text_[pos_]; }

    char advance() {
        char c = text_[pos_++];
        if (c == '\r' && pos_ < text_.size() && text_[pos_] == '\n') {
            c = text_[pos_++];
        }
        if (c == '\r') {
            c = '\n';
        }
        if (c == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        return c;
    }

    /// True if the cursor sits on a line break (or at EOF).
    bool at_eol() const {
        return eof() || text_[pos_] == '\n' || text_[pos_] == '\r';
    }

    void skip_spaces() {
        while (!eof() && is_space(text_[pos_])) {
            advance();
        }
    }

    void skip_line() {
        while (!at_eol()) {
            advance();
        }
        if (!eof()) {
            advance();
        }
    }

    [[noreturn]] void fail(ArffError::Code code, const std::string& message) const {
        throw ArffError(code, line_, column_, message);
    }

  private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
};

char decode_escape(char c) {
    switch (c) {
        case 'n': return '\n';
        case 'r': return '\r';
        case 't': return '\t';
        default: return c;  // \\, \', \", \% and anything else: the char itself
    }
}

/// Read one token. `stop` lists extra terminator characters for unquoted
/// tokens (beyond whitespace and end of line).
Token read_token(Cursor& cur, std::string_view stop) {
    cur.skip_spaces();
    Token tok;
    tok.line = cur.line();
    tok.column = cur.column();
    if (cur.at_eol()) {
        return tok;  // empty token
    }
    const char first = cur.peek();
    if (first == '\'' || first == '"') {
        const char quote = first;
        cur.advance();
        tok.quoted = true;
        for (;;) {
            if (cur.at_eol()) {
                cur.fail(ArffError::Code::Syntax, "unterminated quoted token");
            }
            char c = cur.advance();
            if (c == '\\') {
                if (cur.at_eol()) {
                    cur.fail(ArffError::Code::Syntax, "dangling escape at end of line");
                }
                tok.text.push_back(decode_escape(cur.advance()));
            } else if (c == quote) {
                break;
            } else {
                tok.text.push_back(c);
            }
        }
        return tok;
    }
    while (!cur.at_eol()) {
        const char c = cur.peek();
        if (is_space(c) || c == '%' || stop.find(c) != std::string_view::npos) {
            break;
        }
        tok.text.push_back(cur.advance());
    }
    return tok;
}

/// Consume trailing whitespace and an optional comment, then the line break.
void finish_line(Cursor& cur) {
    cur.skip_spaces();
    if (!cur.at_eol()) {
        if (cur.peek() == '%') {
            cur.skip_line();
            return;
        }
        cur.fail(ArffError::Code::Syntax, "unexpected trailing content");
    }
    if (!cur.eof()) {
        cur.advance();
    }
}

std::optional<double> parse_number(std::string_view text) {
    if (text.empty()) {
        return std::nullopt;
    }
    const char* begin = text.data();
    if (*begin == '+') {  // from_chars rejects an explicit plus sign
        ++begin;
        if (begin == text.data() + text.size()) {
            return std::nullopt;
        }
    }
    double value = 0;
    const auto [ptr, ec] = std::from_chars(begin, text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        return std::nullopt;
    }
    return value;
}

std::vector<std::string> parse_nominal_levels(Cursor& cur) {
    cur.skip_spaces();
    if (cur.at_eol() || cur.peek() != '{') {
        cur.fail(ArffError::Code::Syntax, "expected '{' to open the nominal level list");
    }
    cur.advance();
    std::vector<std::string> levels;
    std::unordered_set<std::string> seen;
    for (;;) {
        Token tok = read_token(cur, ",}");
        cur.skip_spaces();
        if (cur.at_eol()) {
            cur.fail(ArffError::Code::Syntax, "unterminated nominal level list");
        }
        const char c = cur.peek();
        if (tok.text.empty() && !tok.quoted) {
            throw ArffError(ArffError::Code::Syntax, tok.line, tok.column, "empty nominal level");
        }
        if (!seen.insert(tok.text).second) {
            throw ArffError(ArffError::Code::Syntax, tok.line, tok.column,
                            "duplicate nominal level '" + tok.text + "'");
        }
        levels.push_back(std::move(tok.text));
        if (c == ',') {
            cur.advance();
            continue;
        }
        if (c == '}') {
            cur.advance();
            break;
        }
        cur.fail(ArffError::Code::Syntax, "expected ',' or '}' in nominal level list");
    }
    return levels;
}

AttributeDecl parse_attribute_decl(Cursor& cur) {
    AttributeDecl attr;
    Token name = read_token(cur, "{");
    if (name.text.empty() && !name.quoted) {
        throw ArffError(ArffError::Code::Syntax, name.line, name.column,
                        "attribute declaration is missing a name");
    }
    attr.name = std::move(name.text);

    cur.skip_spaces();
    if (cur.at_eol()) {
        cur.fail(ArffError::Code::Syntax, "attribute '" + attr.name + "' is missing a type");
    }
    if (cur.peek() == '{') {
        attr.kind = Kind::Nominal;
        attr.levels = parse_nominal_levels(cur);
        finish_line(cur);
        return attr;
    }

    Token type_tok = read_token(cur, "");
    const std::string type = lower(type_tok.text);
    if (type == "numeric" || type == "integer" || type == "real") {
        attr.kind = Kind::Numeric;
    } else if (type == "string") {
        attr.kind = Kind::Text;
    } else if (type == "date") {
        attr.kind = Kind::Date;
        Token fmt = read_token(cur, "");
        attr.date_format = std::move(fmt.text);
    } else {
        throw ArffError(ArffError::Code::Syntax, type_tok.line, type_tok.column,
                        "unknown attribute type '" + type_tok.text + "'");
    }
    finish_line(cur);
    return attr;
}

Value parse_datum(const Token& tok, const AttributeDecl& attr,
                  const std::unordered_map<std::string, std::int32_t>& level_index) {
    if (!tok.quoted && tok.text == "?") {
        return MissingValue{};
    }
    if (tok.text.empty() && !tok.quoted) {
        throw ArffError(ArffError::Code::Syntax, tok.line, tok.column, "empty value");
    }
    switch (attr.kind) {
        case Kind::Numeric: {
            const auto num = parse_number(tok.text);
            if (!num) {
                throw ArffError(ArffError::Code::Type, tok.line, tok.column,
                                "'" + tok.text + "' is not a number (attribute '" + attr.name + "')");
            }
            return *num;
        }
        case Kind::Nominal: {
            const auto it = level_index.find(tok.text);
            if (it == level_index.end()) {
                throw ArffError(ArffError::Code::Type, tok.line, tok.column,
                                "'" + tok.text + "' is not a declared level of attribute '" +
                                    attr.name + "'");
            }
            return NominalValue{it->second};
        }
        case Kind::Text:
        case Kind::Date:
            return tok.text;
    }
    throw ArffError(ArffError::Code::Type, tok.line, tok.column, "unhandled attribute kind");
}

}  // namespace

ArffError::ArffError(Code code, std::size_t line, std::size_t column, const std::string& message)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      code_(code),
      line_(line),
      column_(column) {}

std::size_t Relation::missing_count() const {
    std::size_t n = 0;
    for (const auto& row : rows) {
        for (const auto& v : row) {
            n += is_missing(v) ? 1 : 0;
        }
    }
    return n;
}

std::ptrdiff_t Relation::attribute_index(std::string_view attr_name) const {
    for (std::size_t i = 0; i < attributes.size(); ++i) {
        if (attributes[i].name == attr_name) {
            return static_cast<std::ptrdiff_t>(i);
        }
    }
    return -1;
}

Relation parse(std::string_view text) {
    Cursor cur(text);
    Relation rel;
    bool saw_relation = false;
    bool saw_data = false;
    std::unordered_set<std::string> attr_names;

    // Header section.
    while (!cur.eof()) {
        cur.skip_spaces();
        if (cur.at_eol()) {
            cur.skip_line();
            continue;
        }
        if (cur.peek() == '%') {
            cur.skip_line();
            continue;
        }
        if (cur.peek() != '@') {
            cur.fail(ArffError::Code::Syntax,
                     saw_relation ? "expected @attribute or @data" : "expected @relation");
        }
        Token keyword = read_token(cur, "");
        const std::string kw = lower(keyword.text);
        if (kw == "@relation") {
            if (saw_relation) {
                throw ArffError(ArffError::Code::Syntax, keyword.line, keyword.column,
                                "duplicate @relation");
            }
            Token name = read_token(cur, "");
            if (name.text.empty() && !name.quoted) {
                throw ArffError(ArffError::Code::Syntax, name.line, name.column,
                                "@relation is missing a name");
            }
            rel.name = std::move(name.text);
            saw_relation = true;
            finish_line(cur);
        } else if (kw == "@attribute") {
            if (!saw_relation) {
                throw ArffError(ArffError::Code::Syntax, keyword.line, keyword.column,
                                "@relation must come before any @attribute");
            }
            AttributeDecl attr = parse_attribute_decl(cur);
            if (!attr_names.insert(attr.name).second) {
                throw ArffError(ArffError::Code::DuplicateAttribute, keyword.line, keyword.column,
                                "duplicate attribute name '" + attr.name + "'");
            }
            rel.attributes.push_back(std::move(attr));
        } else if (kw == "@data") {
            if (!saw_relation) {
                throw ArffError(ArffError::Code::Syntax, keyword.line, keyword.column,
                                "@relation must come before @data");
            }
            if (rel.attributes.empty()) {
                throw ArffError(ArffError::Code::Syntax, keyword.line, keyword.column,
                                "@data without any declared attributes");
            }
            finish_line(cur);
            saw_data = true;
            break;
        } else {
            throw ArffError(ArffError::Code::Syntax, keyword.line, keyword.column,
                            "unknown declaration '" + keyword.text + "'");
        }
    }
    if (!saw_data) {
        cur.fail(ArffError::Code::Syntax, "missing @data section");
    }

    // Per-column nominal lookup tables.
    std::vector<std::unordered_map<std::string, std::int32_t>> level_maps(rel.attributes.size());
    for (std::size_t i = 0; i < rel.attributes.size(); ++i) {
        const auto& levels = rel.attributes[i].levels;
        for (std::size_t j = 0; j < levels.size(); ++j) {
            level_maps[i].emplace(levels[j], static_cast<std::int32_t>(j));
        }
    }

    // Data section.
    while (!cur.eof()) {
        cur.skip_spaces();
        if (cur.at_eol()) {
            cur.skip_line();
            continue;
        }
        if (cur.peek() == '%') {
            cur.skip_line();
            continue;
        }
        if (cur.peek() == '{') {
            cur.fail(ArffError::Code::SparseUnsupported,
                     "sparse data rows are not supported; use dense rows");
        }
        std::vector<Value> row;
        row.reserve(rel.attributes.size());
        for (std::size_t i = 0; i < rel.attributes.size(); ++i) {
            Token tok = read_token(cur, ",");
            if (tok.text.empty() && !tok.quoted && cur.at_eol() && i + 1 < rel.attributes.size()) {
                throw ArffError(ArffError::Code::Syntax, tok.line, tok.column,
                                "row has " + std::to_string(i) + " values, expected " +
                                    std::to_string(rel.attributes.size()));
            }
            row.push_back(parse_datum(tok, rel.attributes[i], level_maps[i]));
            cur.skip_spaces();
            const bool more = !cur.at_eol() && cur.peek() == ',';
            if (i + 1 < rel.attributes.size()) {
                if (!more) {
                    cur.fail(ArffError::Code::Syntax,
                             "row has " + std::to_string(i + 1) + " values, expected " +
                                 std::to_string(rel.attributes.size()));
                }
                cur.advance();
            } else if (more) {
                cur.fail(ArffError::Code::Syntax,
                         "row has more values than the " + std::to_string(rel.attributes.size()) +
                             " declared attributes");
            }
        }
        finish_line(cur);
        rel.rows.push_back(std::move(row));
    }
    return rel;
}

bool needs_quoting(std::string_view token) {
    if (token.empty() || token == "?") {
        return true;
    }
    return token.find_first_of(" \t,'\"%{}\\\n\r") != std::string_view::npos;
}

namespace {

void append_quoted(std::string& out, std::string_view token) {
    out.push_back('\'');
    for (const char c : token) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\'': out += "\\'"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out.push_back(c);
        }
    }
    out.push_back('\'');
}

void append_token(std::string& out, std::string_view token) {
    if (needs_quoting(token)) {
        append_quoted(out, token);
    } else {
        out += token;
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string write(const Relation& rel) {
    std::string out;
    out += "@relation ";
    append_token(out, rel.name);
    out.push_back('\n');
    for (const auto& attr : rel.attributes) {
        out += "@attribute ";
        append_token(out, attr.name);
        out.push_back(' ');
        switch (attr.kind) {
            case Kind::Numeric:
                out += "numeric";
                break;
            case Kind::Text:
                out += "string";
                break;
            case Kind::Date:
                out += "date";
                if (!attr.date_format.empty()) {
                    out.push_back(' ');
                    append_token(out, attr.date_format);
                }
                break;
            case Kind::Nominal: {
                out.push_back('{');
                for (std::size_t i = 0; i < attr.levels.size(); ++i) {
                    if (i > 0) {
                        out.push_back(',');
                    }
                    append_token(out, attr.levels[i]);
                }
                out.push_back('}');
                break;
            }
        }
        out.push_back('\n');
    }
    out += "@data\n";
    for (const auto& row : rel.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) {
                out.push_back(',');
            }
            const auto& attr = rel.attributes[i];
            const Value& v = row[i];
            if (is_missing(v)) {
                out.push_back('?');
            } else if (const double* num = std::get_if<double>(&v)) {
                out += format_double(*num);
            } else if (const auto* nom = std::get_if<NominalValue>(&v)) {
                append_token(out, attr.levels.at(static_cast<std::size_t>(nom->index)));
            } else {
                append_token(out, std::get<std::string>(v));
            }
        }
        out.push_back('\n');
    }
    return out;
}

}  // namespace mlhub::arff
