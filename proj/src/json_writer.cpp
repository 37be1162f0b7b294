#include "ptransit/json_writer.hpp"

#include <cmath>
#include <cstdio>

namespace ptransit {

std::string format_double(double d) {
  if (std::isnan(d)) return "null";
  if (std::isinf(d)) return d > 0 ? "1e308" : "-1e308";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", d);
  return buf;
}

JsonValue JsonValue::str(std::string s) {
  JsonValue v;
  v.kind_ = Kind::string;
  v.string_ = std::move(s);
  return v;
}

JsonValue JsonValue::num(double d) {
  JsonValue v;
  v.kind_ = Kind::number;
  v.number_ = d;
  return v;
}

JsonValue JsonValue::integer(long long i) {
  JsonValue v;
  v.kind_ = Kind::integer;
  v.int_ = i;
  return v;
}

JsonValue JsonValue::boolean(bool b) {
  JsonValue v;
  v.kind_ = Kind::boolean;
  v.bool_ = b;
  return v;
}

JsonValue JsonValue::complex(Complex z) {
  JsonValue v = array();
  v.push(num(z.real()));
  v.push(num(z.imag()));
  return v;
}

JsonValue JsonValue::matrix(const Mat& m) {
  JsonValue rows = array();
  for (int i = 0; i < m.rows(); ++i) {
    JsonValue row = array();
    for (int j = 0; j < m.cols(); ++j) row.push(complex(m(i, j)));
    rows.push(std::move(row));
  }
  return rows;
}

JsonValue JsonValue::real_list(const std::vector<double>& v) {
  JsonValue a = array();
  for (double d : v) a.push(num(d));
  return a;
}

JsonValue& JsonValue::set(const std::string& key, JsonValue v) {
  members_[key] = std::move(v);
  return *this;
}

JsonValue& JsonValue::push(JsonValue v) {
  items_.push_back(std::move(v));
  return *this;
}

namespace {

void write_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
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

void JsonValue::write(std::string& out, int indent, int depth) const {
  std::string pad(size_t(indent) * size_t(depth), ' ');
  std::string pad_in(size_t(indent) * size_t(depth + 1), ' ');
  switch (kind_) {
    case Kind::null: out += "null"; break;
    case Kind::boolean: out += bool_ ? "true" : "false"; break;
    case Kind::integer: out += std::to_string(int_); break;
    case Kind::number: out += format_double(number_); break;
    case Kind::string: write_escaped(out, string_); break;
    case Kind::array: {
      if (items_.empty()) { out += "[]"; break; }
      // inline short numeric arrays (complex pairs and friends)
      bool flat = items_.size() <= 4;
      for (const auto& it : items_)
        flat = flat && (it.kind_ == Kind::number || it.kind_ == Kind::integer);
      if (flat) {
        out += '[';
        for (size_t i = 0; i < items_.size(); ++i) {
          if (i) out += ", ";
          items_[i].write(out, indent, 0);
        }
        out += ']';
        break;
      }
      out += "[\n";
      for (size_t i = 0; i < items_.size(); ++i) {
        out += pad_in;
        items_[i].write(out, indent, depth + 1);
        if (i + 1 < items_.size()) out += ',';
        out += '\n';
      }
      out += pad + "]";
      break;
    }
    case Kind::object: {
      if (members_.empty()) { out += "{}"; break; }
      out += "{\n";
      size_t i = 0;
      for (const auto& [k, v] : members_) {
        out += pad_in;
        write_escaped(out, k);
        out += ": ";
        v.write(out, indent, depth + 1);
        if (++i < members_.size()) out += ',';
        out += '\n';
      }
      out += pad + "}";
      break;
    }
  }
}

std::string JsonValue::dump(int indent) const {
  std::string out;
  write(out, indent, 0);
  out += '\n';
  return out;
}

}  // namespace ptransit
