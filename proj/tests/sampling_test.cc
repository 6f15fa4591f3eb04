// Copyright 2026 The NetCloak Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// -----------------------------------------------------------------------------
// File: sampling_test.cc
// -----------------------------------------------------------------------------

#include "netcloak/sampling.h"

#include <gtest/gtest.h>

#include "netcloak/error.h"
#include "test_support.h"

namespace netcloak {
namespace {

using ::netcloak::testing::MakeGraph;
using ::netcloak::testing::RandomConnectedGraph;

SamplingStrategy Strategy(SamplingKind kind, uint64_t seed) {
  SamplingStrategy s;
  s.kind = kind;
  s.seed = seed;
  return s;
}

TEST(SamplingTest, NamesRoundTrip) {
  for (SamplingKind kind : AllSamplingKinds()) {
    EXPECT_EQ(ParseSamplingKind(SamplingKindName(kind)), kind);
  }
  EXPECT_EQ(AllSamplingKinds().size(), 9u);
  EXPECT_FALSE(ParseSamplingKind("bogus").has_value());
}

TEST(SamplingTest, FullSampleIsTheReference) {
  Topology ref = RandomConnectedGraph(14, 0.2, 3);
  for (SamplingKind kind : AllSamplingKinds()) {
    EXPECT_EQ(SampleSubgraph(ref, 14, Strategy(kind, 5)), ref)
        << SamplingKindName(kind);
  }
}

TEST(SamplingTest, SingleNodeSampleHasNoEdges) {
  Topology ref = RandomConnectedGraph(10, 0.3, 4);
  for (SamplingKind kind : AllSamplingKinds()) {
    Topology s = SampleSubgraph(ref, 1, Strategy(kind, 9));
    EXPECT_EQ(s.NumNodes(), 1u);
    EXPECT_EQ(s.NumEdges(), 0u);
  }
}

TEST(SamplingTest, SizeOutOfRangeIsRejected) {
  Topology ref = MakeGraph(3, {{0, 1}, {1, 2}});
  EXPECT_THROW(SampleSubgraph(ref, 0, {}), Error);
  EXPECT_THROW(SampleSubgraph(ref, 4, {}), Error);
}

TEST(SamplingTest, DisconnectedReferenceIsUnreachable) {
  // Two triangles; no component holds four routers.
  Topology ref = MakeGraph(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
  for (SamplingKind kind : AllSamplingKinds()) {
    try {
      SampleSubgraph(ref, 4, Strategy(kind, 1));
      ADD_FAILURE() << SamplingKindName(kind);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kUnreachableTarget);
    }
  }
}

// Property: samples are induced, connected, of the requested size, and the
// seed determines them.
TEST(SamplingTest, SamplesAreConnectedInducedAndDeterministic) {
  for (uint64_t seed = 1; seed <= 25; ++seed) {
    Topology ref = RandomConnectedGraph(8 + seed % 13, 0.15, seed);
    int n = 1 + static_cast<int>(seed % ref.NumNodes());
    for (SamplingKind kind : AllSamplingKinds()) {
      Topology s = SampleSubgraph(ref, n, Strategy(kind, seed * 31));
      ASSERT_EQ(static_cast<int>(s.NumNodes()), n);
      EXPECT_TRUE(s.IsConnected()) << SamplingKindName(kind);
      std::vector<std::string> nodes = s.Nodes();
      for (const auto& a : nodes) {
        for (const auto& b : nodes) {
          EXPECT_EQ(s.HasEdge(a, b), a != b && ref.HasEdge(a, b));
        }
      }
      EXPECT_EQ(s, SampleSubgraph(ref, n, Strategy(kind, seed * 31)));
    }
  }
}

}  // namespace
}  // namespace netcloak
