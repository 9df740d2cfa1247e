#include "dzvoc/cli/toml.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <vector>

namespace dzvoc::cli {

using nlohmann::json;

ParseError::ParseError(std::size_t line, const std::string& message, const std::string& source)
    : std::runtime_error((source.empty() ? "line " : source + ":") + std::to_string(line) + ": " + message),
      line_(line),
      message_(message) {}

namespace {

bool is_bare_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

class LineParser {
public:
    LineParser(std::string_view text, std::size_t line) : text_(text), line_(line) {}

    json value() {
        skip_ws();
        if (pos_ >= text_.size()) fail("expected a value");
        const char c = text_[pos_];
        if (c == '"') return string();
        if (c == '[') return array();
        if (text_.substr(pos_, 4) == "true" && !continues_word(pos_ + 4)) {
            pos_ += 4;
            return true;
        }
        if (text_.substr(pos_, 5) == "false" && !continues_word(pos_ + 5)) {
            pos_ += 5;
            return false;
        }
        return number();
    }

    void expect_end() {
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing characters '" + std::string(text_.substr(pos_)) + "'");
    }

    [[noreturn]] void fail(const std::string& message) const { throw ParseError(line_, message); }

private:
    bool continues_word(std::size_t at) const { return at < text_.size() && is_bare_char(text_[at]); }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    json string() {
        ++pos_;
        std::string out;
        while (pos_ < text_.size()) {
            const char c = text_[pos_++];
            if (c == '"') return out;
            if (c != '\\') {
                out += c;
                continue;
            }
            if (pos_ >= text_.size()) break;
            switch (text_[pos_++]) {
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                default: fail("unsupported escape sequence in string");
            }
        }
        fail("unterminated string");
    }

    json array() {
        ++pos_;
        json out = json::array();
        for (;;) {
            skip_ws();
            if (pos_ >= text_.size()) fail("unterminated array");
            if (text_[pos_] == ']') {
                ++pos_;
                return out;
            }
            out.push_back(value());
            skip_ws();
            if (pos_ < text_.size() && text_[pos_] == ',') {
                ++pos_;
            } else if (pos_ >= text_.size() || text_[pos_] != ']') {
                fail("expected ',' or ']' in array");
            }
        }
    }

    json number() {
        const std::size_t start = pos_;
        if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
        bool is_float = false;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c >= '0' && c <= '9') {
                ++pos_;
            } else if (c == '.' || c == 'e' || c == 'E') {
                is_float = true;
                ++pos_;
                if ((c == 'e' || c == 'E') && pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            } else {
                break;
            }
        }
        std::string_view token = text_.substr(start, pos_ - start);
        if (token.empty()) fail("expected a value");
        const char* first = token.data();
        if (*first == '+') ++first;
        const char* last = token.data() + token.size();
        if (is_float) {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last) fail("malformed number '" + std::string(token) + "'");
            return v;
        }
        std::int64_t v = 0;
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last) fail("malformed number '" + std::string(token) + "'");
        return v;
    }

    std::string_view text_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

std::string_view strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_string && c == '\\') {
            ++i;
        } else if (c == '"') {
            in_string = !in_string;
        } else if (c == '#' && !in_string) {
            return line.substr(0, i);
        }
    }
    return line;
}

std::vector<std::string> split_path(std::string_view path, std::size_t line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto dot = path.find('.', start);
        const auto part = trim(path.substr(start, dot == std::string_view::npos ? path.npos : dot - start));
        if (part.empty()) throw ParseError(line, "empty key in table name");
        for (char c : part) {
            if (!is_bare_char(c)) throw ParseError(line, "invalid character in key '" + std::string(part) + "'");
        }
        out.emplace_back(part);
        if (dot == std::string_view::npos) return out;
        start = dot + 1;
    }
}

json& descend(json& root, const std::vector<std::string>& path, std::size_t count, std::size_t line) {
    json* node = &root;
    for (std::size_t i = 0; i < count; ++i) {
        json& child = (*node)[path[i]];
        if (child.is_null()) child = json::object();
        if (child.is_array()) {
            if (child.empty() || !child.back().is_object()) {
                throw ParseError(line, "key '" + path[i] + "' is not a table");
            }
            node = &child.back();
        } else if (child.is_object()) {
            node = &child;
        } else {
            throw ParseError(line, "key '" + path[i] + "' is already a value");
        }
    }
    return *node;
}

std::string join(const std::vector<std::string>& path) {
    std::string out;
    for (const auto& p : path) out += (out.empty() ? "" : ".") + p;
    return out;
}

// ---------------------------------------------------------------------------
// Writer

void check_key(const std::string& key) {
    if (key.empty()) throw std::invalid_argument("cannot write an empty TOML key");
    for (char c : key) {
        if (!is_bare_char(c)) throw std::invalid_argument("key '" + key + "' is not a bare TOML key");
    }
}

bool is_table_array(const json& v) {
    if (!v.is_array() || v.empty()) return false;
    for (const auto& e : v) {
        if (!e.is_object()) return false;
    }
    return true;
}

void write_scalar(std::ostream& os, const json& v) {
    switch (v.type()) {
        case json::value_t::string: os << v.dump(); break;
        case json::value_t::boolean: os << (v.get<bool>() ? "true" : "false"); break;
        case json::value_t::number_integer: os << v.get<std::int64_t>(); break;
        case json::value_t::number_unsigned: os << v.get<std::uint64_t>(); break;
        case json::value_t::number_float: {
            const double d = v.get<double>();
            if (!std::isfinite(d)) throw std::invalid_argument("cannot write a non-finite number to TOML");
            char buf[64];
            const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, d);
            std::string s(buf, ptr);
            if (s.find_first_of(".e") == std::string::npos) s += ".0";
            os << s;
            break;
        }
        case json::value_t::array: {
            os << '[';
            bool first = true;
            for (const auto& e : v) {
                if (!first) os << ", ";
                first = false;
                write_scalar(os, e);
            }
            os << ']';
            break;
        }
        default: throw std::invalid_argument("cannot write a nested table inside a TOML array");
    }
}

void write_table(std::ostream& os, const json& obj, const std::string& prefix) {
    for (const auto& [key, v] : obj.items()) {
        if (v.is_null() || v.is_object() || is_table_array(v)) continue;
        check_key(key);
        os << key << " = ";
        write_scalar(os, v);
        os << '\n';
    }
    for (const auto& [key, v] : obj.items()) {
        if (!v.is_object()) continue;
        check_key(key);
        const std::string path = prefix.empty() ? key : prefix + "." + key;
        os << "\n[" << path << "]\n";
        write_table(os, v, path);
    }
    for (const auto& [key, v] : obj.items()) {
        if (!is_table_array(v)) continue;
        check_key(key);
        const std::string path = prefix.empty() ? key : prefix + "." + key;
        for (const auto& e : v) {
            os << "\n[[" << path << "]]\n";
            write_table(os, e, path);
        }
    }
}

}  // namespace

json parse_toml(std::string_view text) {
    json root = json::object();
    json* current = &root;
    std::set<std::string> defined_tables;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        const auto raw = text.substr(start, nl == std::string_view::npos ? text.npos : nl - start);
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        const auto line = trim(strip_comment(raw));
        if (line.empty()) continue;

        if (line.substr(0, 2) == "[[") {
            if (line.size() < 4 || line.substr(line.size() - 2) != "]]") {
                throw ParseError(line_no, "malformed array-of-tables header");
            }
            const auto path = split_path(line.substr(2, line.size() - 4), line_no);
            json& parent = descend(root, path, path.size() - 1, line_no);
            json& arr = parent[path.back()];
            if (arr.is_null()) arr = json::array();
            if (!is_table_array(arr) && !(arr.is_array() && arr.empty())) {
                throw ParseError(line_no, "key '" + join(path) + "' is already defined and is not an array of tables");
            }
            arr.push_back(json::object());
            current = &arr.back();
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(line_no, "malformed table header");
            const auto path = split_path(line.substr(1, line.size() - 2), line_no);
            if (!defined_tables.insert(join(path)).second) {
                throw ParseError(line_no, "table [" + join(path) + "] defined twice");
            }
            current = &descend(root, path, path.size(), line_no);
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError(line_no, "missing key before '='");
        for (char c : key) {
            if (!is_bare_char(c)) throw ParseError(line_no, "invalid character in key '" + std::string(key) + "'");
        }
        if (current->contains(key)) throw ParseError(line_no, "duplicate key '" + std::string(key) + "'");
        LineParser parser(line.substr(eq + 1), line_no);
        json v = parser.value();
        parser.expect_end();
        (*current)[std::string(key)] = std::move(v);
    }
    return root;
}

std::string to_toml(const json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("a TOML document must be a table");
    std::ostringstream os;
    write_table(os, doc, "");
    std::string out = os.str();
    if (!out.empty() && out.front() == '\n') out.erase(0, 1);
    return out;
}

}  // namespace dzvoc::cli
