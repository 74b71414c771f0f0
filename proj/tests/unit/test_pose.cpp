// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>
#include <sstream>

#include "core/pose.hpp"
#include "support/testutil.hpp"

using namespace retarget;

namespace {

std::string detector_json(const std::vector<std::vector<double>>& people) {
  std::ostringstream os;
  os << "{\"version\":1.3,\"people\":[";
  for (size_t p = 0; p < people.size(); ++p) {
    os << (p ? "," : "") << "{\"pose_keypoints_2d\":[";
    for (size_t i = 0; i < people[p].size(); ++i) os << (i ? "," : "") << people[p][i];
    os << "]}";
  }
  os << "]}";
  return os.str();
}

std::vector<double> flat_person(double x, double y, const std::vector<double>& confidences) {
  std::vector<double> flat;
  for (double c : confidences) {
    flat.push_back(x);
    flat.push_back(y);
    flat.push_back(c);
  }
  return flat;
}

}  // namespace

TEST_CASE("parse_detector_frame: single person passes through in file order") {
  std::vector<double> flat;
  for (int j = 0; j < 25; ++j) {
    flat.push_back(10.0 * j);
    flat.push_back(10.0 * j + 1);
    flat.push_back(0.5);
  }
  const Pose pose = parse_detector_frame(detector_json({flat}), SkeletonTopology::body25());
  REQUIRE(pose.joint_count() == 25);
  for (int j = 0; j < 25; ++j) {
    CHECK(pose.joint(j).x == doctest::Approx(10.0 * j));
    CHECK(pose.joint(j).y == doctest::Approx(10.0 * j + 1));
    CHECK(pose.joint(j).confidence == doctest::Approx(0.5));
  }
}

TEST_CASE("parse_detector_frame: empty people list") {
  CHECK_THROWS_WITH_AS(parse_detector_frame("{\"people\":[]}", SkeletonTopology::body25()),
                       doctest::Contains("no person"), Error);
  try {
    parse_detector_frame("{\"people\":[]}", SkeletonTopology::body25());
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::no_person_detected);
  }
}

TEST_CASE("parse_detector_frame: highest total confidence wins") {
  // Person A: 20 joints at 0.8 + 4 at 0.55 + 1 at 0.0 -> sum 18.2.
  std::vector<double> conf_a(20, 0.8);
  conf_a.insert(conf_a.end(), 4, 0.55);
  conf_a.push_back(0.0);
  // Person B: 13 joints at 0.9, rest 0 -> sum 11.7.
  std::vector<double> conf_b(13, 0.9);
  conf_b.insert(conf_b.end(), 12, 0.0);
  double sum_a = 0, sum_b = 0;
  for (double c : conf_a) sum_a += c;
  for (double c : conf_b) sum_b += c;
  CHECK(sum_a == doctest::Approx(18.2));
  CHECK(sum_b == doctest::Approx(11.7));

  // B listed first; A must still be selected.
  const std::string json =
      detector_json({flat_person(7.0, 8.0, conf_b), flat_person(3.0, 4.0, conf_a)});
  const Pose pose = parse_detector_frame(json, SkeletonTopology::body25());
  CHECK(pose.joint(0).x == doctest::Approx(3.0));

  const Pose first = parse_detector_frame(json, SkeletonTopology::body25(),
                                          PersonSelectionPolicy::first);
  CHECK(first.joint(0).x == doctest::Approx(7.0));
}

TEST_CASE("parse_detector_frame: malformed input and topology mismatch") {
  auto code_of = [](const std::string& text) {
    try {
      parse_detector_frame(text, SkeletonTopology::body25());
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::internal;
  };
  CHECK(code_of("not json at all") == ErrorCode::malformed_input);
  CHECK(code_of("{\"nothing\":1}") == ErrorCode::malformed_input);
  CHECK(code_of("{\"people\":[{\"pose_keypoints_2d\":[1,2,0.5,4,5,0.5]}]}") ==
        ErrorCode::topology_mismatch);
  CHECK(code_of("{\"people\":[{\"pose_keypoints_2d\":\"zzz\"}]}") == ErrorCode::malformed_input);
}

TEST_CASE("parse_detector_frame is deterministic on identical bytes") {
  std::mt19937_64 rng(11);
  std::vector<double> flat;
  for (int j = 0; j < 75; ++j) flat.push_back(std::uniform_real_distribution<>(0, 300)(rng));
  for (size_t j = 2; j < flat.size(); j += 3) flat[j] = 0.9;
  const std::string json = detector_json({flat});
  const Pose a = parse_detector_frame(json, SkeletonTopology::body25());
  const Pose b = parse_detector_frame(json, SkeletonTopology::body25());
  for (int j = 0; j < 25; ++j) {
    CHECK(a.joint(j).x == b.joint(j).x);
    CHECK(a.joint(j).y == b.joint(j).y);
    CHECK(a.joint(j).confidence == b.joint(j).confidence);
  }
}

TEST_CASE("pose_distance: identity, 3-4-5 fixture, missing-joint renormalization") {
  auto topo = testutil::two_joint_topology();
  Pose p = Pose::empty(topo), q = Pose::empty(topo);
  p.joint(0) = {0, 0, 1};
  p.joint(1) = {0, 0, 1};
  q.joint(0) = {3, 4, 1};
  q.joint(1) = {0, 0, 1};
  CHECK(pose_distance(p, p) == 0.0);
  CHECK(pose_distance(p, q) == doctest::Approx(2.5).epsilon(1e-12));  // (5+0)/2

  // Drop the second joint in q: distance is renormalized to the one shared joint.
  q.joint(1).confidence = 0.0;
  CHECK(pose_distance(p, q) == doctest::Approx(5.0).epsilon(1e-12));

  q.joint(0).confidence = 0.0;
  CHECK_THROWS_AS(pose_distance(p, q), Error);
}

TEST_CASE("pose_distance: topology mismatch") {
  Pose p = Pose::empty(testutil::two_joint_topology());
  Pose q = Pose::empty(SkeletonTopology::body25());
  CHECK_THROWS_AS(pose_distance(p, q), Error);
}

TEST_CASE("pose_distance: symmetry and triangle inequality over random poses") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 1000; ++i) {
    const Pose p = testutil::full_body25_pose(rng);
    const Pose q = testutil::full_body25_pose(rng);
    const Pose r = testutil::full_body25_pose(rng);
    const double dpq = pose_distance(p, q);
    CHECK(dpq >= 0.0);
    CHECK(dpq == pose_distance(q, p));
    CHECK(dpq <= pose_distance(p, r) + pose_distance(r, q) + 1e-9);
  }
}

TEST_CASE("pose_distance: axis-aligned translation of a pose against itself") {
  std::mt19937_64 rng(43);
  for (double t : {-17.5, -1.0, 0.25, 3.0, 120.0}) {
    const Pose p = testutil::full_body25_pose(rng);
    Pose shifted = p;
    for (auto& kp : shifted.keypoints) kp.x += t;
    CHECK(pose_distance(p, shifted) == doctest::Approx(std::abs(t)).epsilon(1e-12));
  }
}

TEST_CASE("avg_ankle_y fixtures") {
  Pose p = Pose::empty(SkeletonTopology::body25());
  p.joint(14) = {10, 100, 1};
  p.joint(11) = {20, 200, 1};
  p.joint(0) = {15, 0, 1};
  CHECK(avg_ankle_y(p) == doctest::Approx(150.0));

  p.joint(14).y = 340;
  p.joint(11).y = 340;
  CHECK(avg_ankle_y(p) == doctest::Approx(340.0));

  p.joint(14).confidence = 0.0;
  CHECK_THROWS_AS(avg_ankle_y(p), Error);
}

TEST_CASE("subject_height fixtures") {
  Pose p = Pose::empty(SkeletonTopology::body25());
  p.joint(0) = {100, 100, 1};
  p.joint(14) = {100, 400, 1};
  p.joint(11) = {100, 400, 1};
  CHECK(subject_height(p) == doctest::Approx(300.0));

  p.joint(0) = {0, 0, 1};
  p.joint(14) = {3, 0, 1};
  p.joint(11) = {3, 8, 1};
  CHECK(subject_height(p) == doctest::Approx(5.0));  // ||(3,4)||

  p.joint(0) = {3, 4, 1};
  CHECK(subject_height(p) == doctest::Approx(0.0));

  p.joint(11).confidence = 0.01;  // below the missing threshold
  CHECK_THROWS_AS(subject_height(p), Error);
}

TEST_CASE("ankle and height measurements ignore limb ordering") {
  std::mt19937_64 rng(7);
  const Pose p = testutil::full_body25_pose(rng);
  auto reordered = std::make_shared<SkeletonTopology>(*SkeletonTopology::body25());
  std::reverse(reordered->limbs.begin(), reordered->limbs.end());
  std::reverse(reordered->limb_colors.begin(), reordered->limb_colors.end());
  Pose q = p;
  q.topology = reordered;
  CHECK(avg_ankle_y(p) == avg_ankle_y(q));
  CHECK(subject_height(p) == subject_height(q));
}

TEST_CASE("missing threshold boundary") {
  Keypoint kp{1.0, 2.0, kMissingConfidence};
  CHECK(kp.present());
  kp.confidence = kMissingConfidence / 2;
  CHECK(!kp.present());
  kp.confidence = 0.0;
  CHECK(!kp.present());
}
