#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ptransit/types.hpp"

namespace ptransit {

// Deterministic JSON tree: keys sorted, doubles printed with 17 significant
// digits, so identical inputs produce byte-identical reports.
class JsonValue {
 public:
  enum class Kind { object, array, string, number, integer, boolean, null };

  JsonValue() : kind_(Kind::null) {}
  static JsonValue object() { JsonValue v; v.kind_ = Kind::object; return v; }
  static JsonValue array() { JsonValue v; v.kind_ = Kind::array; return v; }
  static JsonValue str(std::string s);
  static JsonValue num(double d);
  static JsonValue integer(long long i);
  static JsonValue boolean(bool b);
  static JsonValue complex(Complex z);          // [re, im]
  static JsonValue matrix(const Mat& m);        // row-major array of [re, im]
  static JsonValue real_list(const std::vector<double>& v);

  JsonValue& set(const std::string& key, JsonValue v);
  JsonValue& push(JsonValue v);

  std::string dump(int indent = 2) const;

 private:
  void write(std::string& out, int indent, int depth) const;

  Kind kind_;
  std::map<std::string, JsonValue> members_;
  std::vector<JsonValue> items_;
  std::string string_;
  double number_ = 0.0;
  long long int_ = 0;
  bool bool_ = false;
};

std::string format_double(double d);  // %.17g with inf/nan guards

}  // namespace ptransit
