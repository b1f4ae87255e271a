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


#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowtoll/errors.h"
#include "flowtoll/io.h"
#include "flowtoll/rng.h"

namespace flowtoll {

GraphKind ParseGraphKind(const std::string& name) {
  if (name == "parallel-links") return GraphKind::kParallelLinks;
  if (name == "grid") return GraphKind::kGrid;
  if (name == "layered-dag") return GraphKind::kLayeredDag;
  throw std::invalid_argument("unknown graph kind '" + name + "'");
}

LatencyKind ParseLatencyKind(const std::string& name) {
  if (name == "affine") return LatencyKind::kAffine;
  if (name == "monomial") return LatencyKind::kMonomial;
  if (name == "pigou") return LatencyKind::kPigou;
  throw std::invalid_argument("unknown latency family '" + name + "'");
}

std::string ToString(GraphKind kind) {
  switch (kind) {
    case GraphKind::kParallelLinks:
      return "parallel-links";
    case GraphKind::kGrid:
      return "grid";
    case GraphKind::kLayeredDag:
      return "layered-dag";
  }
  return "";
}

std::string ToString(LatencyKind kind) {
  switch (kind) {
    case LatencyKind::kAffine:
      return "affine";
    case LatencyKind::kMonomial:
      return "monomial";
    case LatencyKind::kPigou:
      return "pigou";
  }
  return "";
}

namespace {

double Uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.Uniform01();
}

// Random latency with l(n) <= n. Coefficients are rounded to 1e-3 so files
// stay readable.
Latency RandomLatency(LatencyKind family, int edge_index, int players,
                      Rng& rng) {
  const double n = players;
  auto round3 = [](double v) { return std::floor(v * 1000.0) / 1000.0; };
  switch (family) {
    case LatencyKind::kPigou:
      return edge_index == 0 ? Latency::Affine(1.0, 0.0)
                             : Latency::Affine(0.0, 2.0);
    case LatencyKind::kAffine: {
      const double a = round3(Uniform(rng, 0.1, 0.9));
      const double b = round3(Uniform(rng, 0.0, 1.0) * (1.0 - a) * n);
      return Latency::Affine(a, b);
    }
    case LatencyKind::kMonomial: {
      const int k = 2 + static_cast<int>(rng.UniformIndex(2));
      const double b = round3(Uniform(rng, 0.0, 0.5) * n);
      const double a =
          round3(Uniform(rng, 0.2, 1.0) * (n - b) / std::pow(n, k));
      return Latency::Monomial(a, k, b);
    }
  }
  throw std::logic_error("unhandled latency family");
}

struct Skeleton {
  std::vector<std::string> names;
  std::vector<Edge> edges;
};

Skeleton ParallelLinks(int edges) {
  Skeleton s;
  s.names = {"s", "t"};
  for (int e = 0; e < std::max(1, edges); ++e) s.edges.push_back({0, 1});
  return s;
}

// Bidirectional k x k grid; k chosen so the edge count is closest to the
// target (4k(k-1) edges).
Skeleton Grid(int edges) {
  int side = 2;
  for (int k = 2; k <= 32; ++k) {
    if (std::abs(4 * k * (k - 1) - edges) <
        std::abs(4 * side * (side - 1) - edges)) {
      side = k;
    }
  }
  Skeleton s;
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      s.names.push_back("g" + std::to_string(r) + "_" + std::to_string(c));
    }
  }
  auto id = [side](int r, int c) { return r * side + c; };
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      if (c + 1 < side) {
        s.edges.push_back({id(r, c), id(r, c + 1)});
        s.edges.push_back({id(r, c + 1), id(r, c)});
      }
      if (r + 1 < side) {
        s.edges.push_back({id(r, c), id(r + 1, c)});
        s.edges.push_back({id(r + 1, c), id(r, c)});
      }
    }
  }
  return s;
}

// Source, `layers` layers of width 2 or 3, sink. Every vertex gets one edge
// into the next layer; extra cross edges are added at random up to the
// target.
Skeleton LayeredDag(int edges, Rng& rng) {
  const int width = edges <= 12 ? 2 : 3;
  const int layers =
      std::max(1, (edges - 2 * width) / (width * width) + 1);
  Skeleton s;
  s.names.push_back("s");
  for (int l = 0; l < layers; ++l) {
    for (int w = 0; w < width; ++w) {
      s.names.push_back("l" + std::to_string(l) + "_" + std::to_string(w));
    }
  }
  s.names.push_back("t");
  const int sink = static_cast<int>(s.names.size()) - 1;
  auto id = [width](int l, int w) { return 1 + l * width + w; };
  for (int w = 0; w < width; ++w) s.edges.push_back({0, id(0, w)});
  std::vector<Edge> optional;
  for (int l = 0; l + 1 < layers; ++l) {
    for (int w = 0; w < width; ++w) {
      const int forced = static_cast<int>(rng.UniformIndex(width));
      s.edges.push_back({id(l, w), id(l + 1, forced)});
      for (int v = 0; v < width; ++v) {
        if (v != forced) optional.push_back({id(l, w), id(l + 1, v)});
      }
    }
  }
  for (int w = 0; w < width; ++w) s.edges.push_back({id(layers - 1, w), sink});
  // Fisher-Yates with the seeded stream, then take what fits the target.
  for (std::size_t k = optional.size(); k > 1; --k) {
    std::swap(optional[k - 1], optional[rng.UniformIndex(k)]);
  }
  for (const Edge& e : optional) {
    if (static_cast<int>(s.edges.size()) >= edges) break;
    s.edges.push_back(e);
  }
  std::stable_sort(s.edges.begin(), s.edges.end(),
                   [](const Edge& a, const Edge& b) {
                     return a.tail != b.tail ? a.tail < b.tail
                                             : a.head < b.head;
                   });
  return s;
}

}  // namespace

RoutingInstance GenerateInstance(const GeneratorParams& params) {
  if (params.players < 1) throw std::invalid_argument("players must be >= 1");
  if (params.edges < 1) throw std::invalid_argument("edges must be >= 1");
  for (int attempt = 0; attempt < 100; ++attempt) {
    Rng rng = Rng(params.seed).Substream(StreamTag::kGenerator,
                                         static_cast<std::uint64_t>(attempt));
    Skeleton sk;
    switch (params.kind) {
      case GraphKind::kParallelLinks:
        sk = ParallelLinks(params.edges);
        break;
      case GraphKind::kGrid:
        sk = Grid(params.edges);
        break;
      case GraphKind::kLayeredDag:
        sk = LayeredDag(params.edges, rng);
        break;
    }
    std::vector<Latency> latencies;
    for (std::size_t e = 0; e < sk.edges.size(); ++e) {
      latencies.push_back(RandomLatency(params.family, static_cast<int>(e),
                                        params.players, rng));
    }
    Network network(sk.names, sk.edges, latencies);
    const int v_count = network.num_vertices();
    std::vector<Demand> demands;
    for (int i = 0; i < params.players; ++i) {
      if (params.kind == GraphKind::kGrid) {
        const int s = static_cast<int>(rng.UniformIndex(v_count));
        int t = static_cast<int>(rng.UniformIndex(v_count - 1));
        if (t >= s) ++t;
        demands.push_back({s, t});
      } else if (params.kind == GraphKind::kLayeredDag &&
                 rng.Uniform01() < 0.25) {
        demands.push_back({static_cast<int>(rng.UniformIndex(v_count - 1)),
                           v_count - 1});
      } else {
        demands.push_back({0, v_count - 1});
      }
    }
    bool routable = true;
    for (const Demand& d : demands) {
      routable = routable && d.source != d.destination &&
                 network.Reachable(d.source, d.destination);
    }
    if (!routable) continue;
    return RoutingInstance(std::move(network), std::move(demands));
  }
  throw SemanticError("no routable configuration after 100 attempts");
}

}  // namespace flowtoll
