#include "robustde/report.hpp"

#include <cmath>
#include <cstdio>

namespace robustde {

std::string format_double(double v) {
    if (std::isnan(v)) return "null";
    if (std::isinf(v)) return v > 0 ? "1e308" : "-1e308";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string escape_json(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
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
    return out;
}

JsonValue JsonValue::null() { return JsonValue(); }

JsonValue JsonValue::boolean(bool b) {
    JsonValue v;
    v.type_ = Type::kBool;
    v.bool_ = b;
    return v;
}

JsonValue JsonValue::integer(std::int64_t x) {
    JsonValue v;
    v.type_ = Type::kInt;
    v.int_ = x;
    return v;
}

JsonValue JsonValue::unsigned_integer(std::uint64_t x) {
    JsonValue v;
    v.type_ = Type::kUint;
    v.uint_ = x;
    return v;
}

JsonValue JsonValue::number(double x) {
    JsonValue v;
    v.type_ = Type::kNumber;
    v.num_ = x;
    return v;
}

JsonValue JsonValue::string(std::string s) {
    JsonValue v;
    v.type_ = Type::kString;
    v.str_ = std::move(s);
    return v;
}

JsonValue JsonValue::array() {
    JsonValue v;
    v.type_ = Type::kArray;
    return v;
}

JsonValue JsonValue::object() {
    JsonValue v;
    v.type_ = Type::kObject;
    return v;
}

void JsonValue::push_back(JsonValue v) { items_.push_back(std::move(v)); }

void JsonValue::set(const std::string& key, JsonValue v) {
    members_.emplace_back(key, std::move(v));
}

void JsonValue::write(std::string& out, int indent, int depth) const {
    const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
    const std::string closing_pad(static_cast<std::size_t>(indent) * depth, ' ');
    switch (type_) {
        case Type::kNull: out += "null"; break;
        case Type::kBool: out += bool_ ? "true" : "false"; break;
        case Type::kInt: out += std::to_string(int_); break;
        case Type::kUint: out += std::to_string(uint_); break;
        case Type::kNumber: out += format_double(num_); break;
        case Type::kString:
            out += '"';
            out += escape_json(str_);
            out += '"';
            break;
        case Type::kArray:
            if (items_.empty()) {
                out += "[]";
                break;
            }
            out += "[\n";
            for (std::size_t i = 0; i < items_.size(); ++i) {
                out += pad;
                items_[i].write(out, indent, depth + 1);
                if (i + 1 < items_.size()) out += ',';
                out += '\n';
            }
            out += closing_pad;
            out += ']';
            break;
        case Type::kObject:
            if (members_.empty()) {
                out += "{}";
                break;
            }
            out += "{\n";
            for (std::size_t i = 0; i < members_.size(); ++i) {
                out += pad;
                out += '"';
                out += escape_json(members_[i].first);
                out += "\": ";
                members_[i].second.write(out, indent, depth + 1);
                if (i + 1 < members_.size()) out += ',';
                out += '\n';
            }
            out += closing_pad;
            out += '}';
            break;
    }
}

std::string JsonValue::dump(int indent) const {
    std::string out;
    write(out, indent, 0);
    out += '\n';
    return out;
}

}  // namespace robustde
