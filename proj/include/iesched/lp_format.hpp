// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "iesched/milp.hpp"

namespace iesched::milp {

namespace lp_detail {

inline std::string fmt(double v) {
  if (v == std::floor(v) && std::fabs(v) < 1e15) {
    // integral values print without exponent noise
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(v));
    return std::string(buf, r.ptr);
  }
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline bool valid_name(const std::string& s) {
  if (s.empty() || s.size() > 255) return false;
  if (std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  static const char* reserved[] = {"minimize", "maximize", "min",  "max",  "subject",
                                   "st",       "bounds",   "free", "binaries", "binary",
                                   "end",      "infinity", "inf",  "generals", "general"};
  std::string low;
  for (char c : s) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (const char* r : reserved)
    if (low == r) return false;
  return true;
}

inline void append_terms(std::string& out, const std::vector<LinTerm>& terms,
                         const std::vector<Variable>& vars) {
  bool first = true;
  for (const auto& t : terms) {
    if (t.coef == 0.0) continue;
    const double a = std::fabs(t.coef);
    if (first) {
      if (t.coef < 0.0) out += "- ";
      first = false;
    } else {
      out += (t.coef < 0.0) ? "- " : "+ ";
    }
    out += fmt(a);
    out += ' ';
    out += vars[static_cast<std::size_t>(t.var)].name;
    out += ' ';
  }
  if (first) {
    out += "0 ";
    out += vars.empty() ? "x" : vars[0].name;
    out += ' ';
  }
}

}  // namespace lp_detail

// Serializes a model in the industry-standard LP text format: objective
// sense line, constraint section, Bounds, Binaries, End. Every variable is
// listed in Bounds so re-importing recovers the full variable set.
inline std::string export_lp_file(const MilpModel& model) {
  model.validate();
  for (const auto& v : model.variables())
    if (!lp_detail::valid_name(v.name))
      throw std::invalid_argument("export_lp_file: invalid variable name '" + v.name + "'");

  std::string out;
  out.reserve(4096);
  out += "Minimize\n obj: ";
  std::vector<LinTerm> obj_terms;
  for (int j = 0; j < model.num_vars(); ++j)
    if (model.objective()[static_cast<std::size_t>(j)] != 0.0)
      obj_terms.push_back({j, model.objective()[static_cast<std::size_t>(j)]});
  lp_detail::append_terms(out, obj_terms, model.variables());
  if (model.objective_constant() != 0.0) {
    out += (model.objective_constant() < 0.0) ? "- " : "+ ";
    out += lp_detail::fmt(std::fabs(model.objective_constant()));
  }
  out += "\nSubject To\n";
  for (int i = 0; i < model.num_constraints(); ++i) {
    const auto& r = model.constraint(i);
    out += ' ';
    if (!r.name.empty()) {
      out += r.name;
      out += ": ";
    }
    lp_detail::append_terms(out, r.terms, model.variables());
    switch (r.sense) {
      case Sense::LE: out += "<= "; break;
      case Sense::GE: out += ">= "; break;
      case Sense::EQ: out += "= "; break;
    }
    out += lp_detail::fmt(r.rhs);
    out += '\n';
  }
  out += "Bounds\n";
  for (const auto& v : model.variables()) {
    out += ' ';
    const bool lb_inf = !std::isfinite(v.lb);
    const bool ub_inf = !std::isfinite(v.ub);
    if (lb_inf && ub_inf) {
      out += v.name;
      out += " free";
    } else if (v.lb == v.ub) {
      out += v.name;
      out += " = ";
      out += lp_detail::fmt(v.lb);
    } else if (lb_inf) {
      out += "-infinity <= ";
      out += v.name;
      out += " <= ";
      out += lp_detail::fmt(v.ub);
    } else if (ub_inf) {
      out += v.name;
      out += " >= ";
      out += lp_detail::fmt(v.lb);
    } else {
      out += lp_detail::fmt(v.lb);
      out += " <= ";
      out += v.name;
      out += " <= ";
      out += lp_detail::fmt(v.ub);
    }
    out += '\n';
  }
  bool any_bin = false;
  for (const auto& v : model.variables()) any_bin = any_bin || v.integer;
  if (any_bin) {
    out += "Binaries\n";
    int on_line = 0;
    for (const auto& v : model.variables()) {
      if (!v.integer) continue;
      out += ' ';
      out += v.name;
      if (++on_line == 8) {
        out += '\n';
        on_line = 0;
      }
    }
    if (on_line != 0) out += '\n';
  }
  out += "End\n";
  return out;
}

namespace lp_detail {

struct Token {
  enum Kind { kName, kNumber, kOp, kColon, kEnd } kind = kEnd;
  std::string text;
  double value = 0.0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  Token next() {
    skip_ws();
    if (pos_ >= s_.size()) return {};
    const char c = s_[pos_];
    if (c == ':') {
      ++pos_;
      return {Token::kColon, ":"};
    }
    if (c == '<' || c == '>' || c == '=') {
      std::string op(1, c);
      ++pos_;
      if (pos_ < s_.size() && s_[pos_] == '=') {
        op += '=';
        ++pos_;
      }
      if (op == "<") op = "<=";
      if (op == ">") op = ">=";
      return {Token::kOp, op};
    }
    if (c == '+' || c == '-') {
      ++pos_;
      return {Token::kOp, std::string(1, c)};
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
              s_[pos_] == 'e' || s_[pos_] == 'E' ||
              ((s_[pos_] == '+' || s_[pos_] == '-') &&
               (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
        ++pos_;
      Token t{Token::kNumber, std::string(s_.substr(start, pos_ - start))};
      const auto r = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.value);
      if (r.ec != std::errc{})
        throw std::invalid_argument("lp parse: bad number '" + t.text + "'");
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                                  s_[pos_] == '_' || s_[pos_] == '.'))
        ++pos_;
      Token t{Token::kName, std::string(s_.substr(start, pos_ - start))};
      std::string low = lower(t.text);
      if (low == "infinity" || low == "inf") {
        t.kind = Token::kNumber;
        t.value = std::numeric_limits<double>::infinity();
      }
      return t;
    }
    throw std::invalid_argument(std::string("lp parse: unexpected character '") + c + "'");
  }

  static std::string lower(const std::string& s) {
    std::string r;
    for (char c : s) r.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return r;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '\\') {  // comment to end of line
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

inline bool is_section(const std::string& low) {
  return low == "subject" || low == "st" || low == "bounds" || low == "binaries" ||
         low == "binary" || low == "end" || low == "generals" || low == "general" ||
         low == "minimize" || low == "maximize" || low == "min" || low == "max" ||
         low == "free";
}

}  // namespace lp_detail

// Parses the dialect emitted by export_lp_file (plus the usual latitude in
// keywords and operators). Variables are registered in order of first
// appearance; the reconstruction is semantically exact per name.
inline MilpModel parse_lp_file(std::string_view text) {
  using lp_detail::Lexer;
  using lp_detail::Token;
  Lexer lex(text);
  MilpModel model;
  std::map<std::string, int> index;
  auto var_of = [&](const std::string& name) {
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    const int id = model.add_variable(name, 0.0, kInf, false);  // LP default bounds
    index.emplace(name, id);
    return id;
  };

  Token tok = lex.next();
  if (tok.kind != Token::kName)
    throw std::invalid_argument("lp parse: missing objective sense");
  std::string low = Lexer::lower(tok.text);
  bool maximize = false;
  if (low == "maximize" || low == "max") maximize = true;
  else if (low != "minimize" && low != "min")
    throw std::invalid_argument("lp parse: expected Minimize/Maximize, got '" + tok.text + "'");

  // objective expression (optionally named), up to the next section keyword
  tok = lex.next();
  {
    // optional label
    if (tok.kind == Token::kName) {
      Lexer probe = lex;  // lookahead for ':'
      Token nxt = probe.next();
      if (nxt.kind == Token::kColon) {
        lex = probe;
        tok = lex.next();
      }
    }
    double sign = 1.0;
    bool have_coef = false;
    double coef = 1.0;
    while (true) {
      if (tok.kind == Token::kEnd) throw std::invalid_argument("lp parse: truncated objective");
      if (tok.kind == Token::kName && lp_detail::is_section(Lexer::lower(tok.text))) break;
      if (tok.kind == Token::kOp && (tok.text == "+" || tok.text == "-")) {
        if (have_coef) {  // dangling constant
          model.set_objective_constant(model.objective_constant() + sign * coef);
          have_coef = false;
        }
        sign = (tok.text == "-") ? -sign : sign;
      } else if (tok.kind == Token::kNumber) {
        if (have_coef) {
          model.set_objective_constant(model.objective_constant() + sign * coef);
          sign = 1.0;
        }
        coef = tok.value;
        have_coef = true;
      } else if (tok.kind == Token::kName) {
        const int v = var_of(tok.text);
        model.add_objective(v, sign * (have_coef ? coef : 1.0));
        sign = 1.0;
        have_coef = false;
      } else {
        throw std::invalid_argument("lp parse: unexpected token in objective '" + tok.text + "'");
      }
      tok = lex.next();
    }
    if (have_coef) model.set_objective_constant(model.objective_constant() + sign * coef);
  }

  low = Lexer::lower(tok.text);
  if (low == "subject" || low == "st") {
    if (low == "subject") {
      Token to = lex.next();  // "To"
      if (to.kind != Token::kName || Lexer::lower(to.text) != "to")
        throw std::invalid_argument("lp parse: expected 'Subject To'");
    }
    tok = lex.next();
    while (!(tok.kind == Token::kName && lp_detail::is_section(Lexer::lower(tok.text)))) {
      if (tok.kind == Token::kEnd) throw std::invalid_argument("lp parse: truncated constraints");
      std::string row_name;
      if (tok.kind == Token::kName) {
        Lexer probe = lex;
        Token nxt = probe.next();
        if (nxt.kind == Token::kColon) {
          row_name = tok.text;
          lex = probe;
          tok = lex.next();
        }
      }
      std::vector<LinTerm> terms;
      double sign = 1.0, coef = 1.0;
      bool have_coef = false;
      Sense sense = Sense::LE;
      while (true) {
        if (tok.kind == Token::kEnd) throw std::invalid_argument("lp parse: truncated row");
        if (tok.kind == Token::kOp && (tok.text == "<=" || tok.text == ">=" || tok.text == "=")) {
          sense = tok.text == "<=" ? Sense::LE : tok.text == ">=" ? Sense::GE : Sense::EQ;
          break;
        }
        if (tok.kind == Token::kOp && (tok.text == "+" || tok.text == "-")) {
          sign = (tok.text == "-") ? -sign : sign;
        } else if (tok.kind == Token::kNumber) {
          coef = tok.value;
          have_coef = true;
        } else if (tok.kind == Token::kName) {
          const int v = var_of(tok.text);
          const double c = sign * (have_coef ? coef : 1.0);
          if (c != 0.0) terms.push_back({v, c});
          sign = 1.0;
          have_coef = false;
        } else {
          throw std::invalid_argument("lp parse: unexpected token in row '" + tok.text + "'");
        }
        tok = lex.next();
      }
      Token rhs_sign = lex.next();
      double rsign = 1.0;
      if (rhs_sign.kind == Token::kOp && (rhs_sign.text == "+" || rhs_sign.text == "-")) {
        rsign = rhs_sign.text == "-" ? -1.0 : 1.0;
        rhs_sign = lex.next();
      }
      if (rhs_sign.kind != Token::kNumber)
        throw std::invalid_argument("lp parse: missing rhs");
      model.add_constraint(row_name, std::move(terms), sense, rsign * rhs_sign.value);
      tok = lex.next();
    }
  }

  low = Lexer::lower(tok.text);
  if (low == "bounds") {
    tok = lex.next();
    while (!(tok.kind == Token::kName && lp_detail::is_section(Lexer::lower(tok.text)))) {
      if (tok.kind == Token::kEnd) throw std::invalid_argument("lp parse: truncated bounds");
      double lead_sign = 1.0;
      if (tok.kind == Token::kOp && (tok.text == "+" || tok.text == "-")) {
        lead_sign = tok.text == "-" ? -1.0 : 1.0;
        tok = lex.next();
      }
      if (tok.kind == Token::kNumber) {
        // form: num <= name <= num
        const double lb = lead_sign * tok.value;
        Token op = lex.next();
        if (!(op.kind == Token::kOp && op.text == "<="))
          throw std::invalid_argument("lp parse: malformed bound");
        Token name = lex.next();
        if (name.kind != Token::kName) throw std::invalid_argument("lp parse: malformed bound");
        const int v = var_of(name.text);
        double ub = model.variable(v).ub;
        Lexer probe = lex;
        Token op2 = probe.next();
        if (op2.kind == Token::kOp && op2.text == "<=") {
          lex = probe;
          Token ubs = lex.next();
          double usign = 1.0;
          if (ubs.kind == Token::kOp && (ubs.text == "+" || ubs.text == "-")) {
            usign = ubs.text == "-" ? -1.0 : 1.0;
            ubs = lex.next();
          }
          if (ubs.kind != Token::kNumber) throw std::invalid_argument("lp parse: malformed bound");
          ub = usign * ubs.value;
        }
        model.set_var_bounds(v, lb, ub);
      } else if (tok.kind == Token::kName) {
        const int v = var_of(tok.text);
        Token op = lex.next();
        if (op.kind == Token::kName && Lexer::lower(op.text) == "free") {
          model.set_var_bounds(v, -kInf, kInf);
        } else if (op.kind == Token::kOp && (op.text == "<=" || op.text == ">=" || op.text == "=")) {
          Token num = lex.next();
          double nsign = 1.0;
          if (num.kind == Token::kOp && (num.text == "+" || num.text == "-")) {
            nsign = num.text == "-" ? -1.0 : 1.0;
            num = lex.next();
          }
          if (num.kind != Token::kNumber) throw std::invalid_argument("lp parse: malformed bound");
          const double val = nsign * num.value;
          const auto& cur = model.variable(v);
          if (op.text == "<=") model.set_var_bounds(v, cur.lb, val);
          else if (op.text == ">=") model.set_var_bounds(v, val, cur.ub);
          else model.set_var_bounds(v, val, val);
        } else {
          throw std::invalid_argument("lp parse: malformed bound line");
        }
      } else {
        throw std::invalid_argument("lp parse: malformed bounds section");
      }
      tok = lex.next();
    }
  }

  low = Lexer::lower(tok.text);
  if (low == "binaries" || low == "binary") {
    tok = lex.next();
    while (!(tok.kind == Token::kName && lp_detail::is_section(Lexer::lower(tok.text)))) {
      if (tok.kind == Token::kEnd) throw std::invalid_argument("lp parse: truncated binaries");
      if (tok.kind != Token::kName)
        throw std::invalid_argument("lp parse: expected variable name in Binaries");
      const int v = var_of(tok.text);
      const auto& cur = model.variable(v);
      model.set_var_bounds(v, std::max(cur.lb, 0.0), std::min(cur.ub, 1.0));
      model.set_integer(v, true);
      tok = lex.next();
    }
  }

  low = Lexer::lower(tok.text);
  if (low != "end") throw std::invalid_argument("lp parse: missing End");

  if (maximize) {
    for (int j = 0; j < model.num_vars(); ++j)
      model.set_objective(j, -model.objective()[static_cast<std::size_t>(j)]);
    model.set_objective_constant(-model.objective_constant());
  }
  model.validate();
  return model;
}

}  // namespace iesched::milp
