#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace robustde {

// Shortest round-trip decimal form (printf %.17g) so numeric output is
// deterministic across runs and platforms.
std::string format_double(double v);

// Minimal JSON document builder. Keys keep insertion order, doubles go
// through format_double, and dump() is stable byte-for-byte for a given
// document, which is what the CLI determinism contract needs.
class JsonValue {
  public:
    static JsonValue null();
    static JsonValue boolean(bool b);
    static JsonValue integer(std::int64_t v);
    static JsonValue unsigned_integer(std::uint64_t v);
    static JsonValue number(double v);
    static JsonValue string(std::string s);
    static JsonValue array();
    static JsonValue object();

    void push_back(JsonValue v);                      // arrays
    void set(const std::string& key, JsonValue v);    // objects

    std::string dump(int indent = 2) const;

  private:
    enum class Type { kNull, kBool, kInt, kUint, kNumber, kString, kArray, kObject };
    Type type_ = Type::kNull;
    bool bool_ = false;
    std::int64_t int_ = 0;
    std::uint64_t uint_ = 0;
    double num_ = 0.0;
    std::string str_;
    std::vector<JsonValue> items_;
    std::vector<std::pair<std::string, JsonValue>> members_;

    void write(std::string& out, int indent, int depth) const;
};

std::string escape_json(const std::string& s);

}  // namespace robustde
