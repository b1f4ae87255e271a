// Copyright 2026 The FlowToll Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "flowtoll/errors.h"
#include "flowtoll/io.h"

namespace flowtoll {

std::string FormatDouble(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

Json JsonNumber(double value) {
  if (std::isfinite(value)) return value;
  return FormatDouble(value);
}

double ReadJsonNumber(const Json& value) {
  if (value.is_number()) return value.get<double>();
  const std::string s = value.get<std::string>();
  if (s == "inf") return kInfinity;
  if (s == "-inf") return -kInfinity;
  return std::nan("");
}

namespace {

struct Token {
  std::string text;
  std::size_t column;  // 1-based
};

std::vector<Token> Tokenize(const std::string& line) {
  std::vector<Token> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    if (line[pos] == '#') break;
    if (std::isspace(static_cast<unsigned char>(line[pos]))) {
      ++pos;
      continue;
    }
    const std::size_t start = pos;
    while (pos < line.size() && line[pos] != '#' &&
           !std::isspace(static_cast<unsigned char>(line[pos]))) {
      ++pos;
    }
    out.push_back({line.substr(start, pos - start), start + 1});
  }
  return out;
}

double ParseNumber(const Token& tok, std::size_t line) {
  double v = 0.0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ParseError(line, tok.column, "expected a number, got '" +
                                           tok.text + "'");
  }
  return v;
}

int ParseInteger(const Token& tok, std::size_t line) {
  int v = 0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(line, tok.column, "expected an integer, got '" +
                                           tok.text + "'");
  }
  return v;
}

void ExpectArity(const std::vector<Token>& toks, std::size_t count,
                 std::size_t line) {
  if (toks.size() < count) {
    const Token& last = toks.back();
    throw ParseError(line, last.column + last.text.size(),
                     "'" + toks.front().text + "' needs " +
                         std::to_string(count - 1) + " fields");
  }
  if (toks.size() > count) {
    throw ParseError(line, toks[count].column,
                     "unexpected field '" + toks[count].text + "'");
  }
}

struct PendingEdge {
  Token tail;
  Token head;
  Latency latency;
  std::size_t line;
};

struct PendingDemand {
  Token source;
  Token destination;
  std::size_t line;
};

}  // namespace

RoutingInstance ParseInstance(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<std::string> vertices;
  std::map<std::string, int> index;
  std::vector<PendingEdge> edges;
  std::vector<PendingDemand> demands;
  std::optional<double> opt;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::vector<Token> toks = Tokenize(raw);
    if (toks.empty()) continue;
    if (!header_seen) {
      if (toks.size() != 2 || toks[0].text + " " + toks[1].text !=
                                  std::string(kInstanceHeader)) {
        throw ParseError(line_no, toks[0].column,
                         "expected header '" + std::string(kInstanceHeader) +
                             "'");
      }
      header_seen = true;
      continue;
    }
    const std::string& key = toks[0].text;
    if (key == "vertex") {
      ExpectArity(toks, 2, line_no);
      if (index.count(toks[1].text)) {
        throw SemanticError("line " + std::to_string(line_no) +
                            ": duplicate vertex id '" + toks[1].text + "'");
      }
      index[toks[1].text] = static_cast<int>(vertices.size());
      vertices.push_back(toks[1].text);
    } else if (key == "edge") {
      if (toks.size() < 4) ExpectArity(toks, 6, line_no);
      const std::string& family = toks[3].text;
      Latency latency = Latency::Affine(0.0, 0.0);
      try {
        if (family == "affine") {
          ExpectArity(toks, 6, line_no);
          latency = Latency::Affine(ParseNumber(toks[4], line_no),
                                    ParseNumber(toks[5], line_no));
        } else if (family == "monomial") {
          ExpectArity(toks, 7, line_no);
          latency = Latency::Monomial(ParseNumber(toks[4], line_no),
                                      ParseInteger(toks[5], line_no),
                                      ParseNumber(toks[6], line_no));
        } else {
          throw ParseError(line_no, toks[3].column,
                           "unknown latency family '" + family + "'");
        }
      } catch (const SemanticError& err) {
        throw SemanticError("line " + std::to_string(line_no) + ": " +
                            err.what());
      }
      edges.push_back({toks[1], toks[2], latency, line_no});
    } else if (key == "demand") {
      ExpectArity(toks, 3, line_no);
      demands.push_back({toks[1], toks[2], line_no});
    } else if (key == "opt") {
      ExpectArity(toks, 2, line_no);
      if (opt) {
        throw SemanticError("line " + std::to_string(line_no) +
                            ": duplicate opt annotation");
      }
      opt = ParseNumber(toks[1], line_no);
    } else {
      throw ParseError(line_no, toks[0].column,
                       "unknown field '" + key + "'");
    }
  }
  if (!header_seen) throw ParseError(1, 1, "missing header");

  auto resolve = [&](const Token& tok, std::size_t line) {
    auto it = index.find(tok.text);
    if (it == index.end()) {
      throw SemanticError("line " + std::to_string(line) +
                          ": unknown vertex '" + tok.text + "'");
    }
    return it->second;
  };
  std::vector<Edge> edge_list;
  std::vector<Latency> latencies;
  for (const PendingEdge& e : edges) {
    edge_list.push_back({resolve(e.tail, e.line), resolve(e.head, e.line)});
    latencies.push_back(e.latency);
  }
  std::vector<Demand> demand_list;
  for (const PendingDemand& d : demands) {
    demand_list.push_back(
        {resolve(d.source, d.line), resolve(d.destination, d.line)});
  }
  return RoutingInstance(Network(vertices, edge_list, latencies), demand_list,
                         opt);
}

std::string SerializeInstance(const RoutingInstance& inst) {
  const Network& net = inst.network();
  std::ostringstream out;
  out << kInstanceHeader << "\n";
  for (const std::string& v : net.vertex_names()) out << "vertex " << v << "\n";
  for (int e = 0; e < net.num_edges(); ++e) {
    const Edge& edge = net.edge(e);
    const Latency& l = net.latency(e);
    out << "edge " << net.vertex_names()[edge.tail] << " "
        << net.vertex_names()[edge.head] << " ";
    if (l.family() == LatencyFamily::kAffine) {
      out << "affine " << FormatDouble(l.a()) << " " << FormatDouble(l.b());
    } else {
      out << "monomial " << FormatDouble(l.a()) << " " << l.k() << " "
          << FormatDouble(l.b());
    }
    out << "\n";
  }
  for (const Demand& d : inst.demands()) {
    out << "demand " << net.vertex_names()[d.source] << " "
        << net.vertex_names()[d.destination] << "\n";
  }
  if (inst.known_opt()) out << "opt " << FormatDouble(*inst.known_opt()) << "\n";
  return out.str();
}

RoutingInstance LoadInstance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SemanticError("cannot open instance file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseInstance(buf.str());
}

void SaveInstance(const std::string& path, const RoutingInstance& inst) {
  std::ofstream out(path);
  if (!out) throw SemanticError("cannot write instance file '" + path + "'");
  out << SerializeInstance(inst);
}

}  // namespace flowtoll
