#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "drgen/errors.hpp"
#include "drgen/geometry.hpp"
#include "test_support.hpp"

using namespace drgen;
using doctest::Approx;

namespace {

void check_vec(const Vec3& a, const Vec3& b, double tol) {
  CHECK(std::abs(a.x - b.x) <= tol);
  CHECK(std::abs(a.y - b.y) <= tol);
  CHECK(std::abs(a.z - b.z) <= tol);
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("parse_mesh minimal triangle") {
    const Mesh m = parse_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3");
    CHECK(m.vertices.size() == 3);
    REQUIRE(m.triangles.size() == 1);
    CHECK(m.triangles[0] == Triangle{0, 1, 2});
  }

  TEST_CASE("parse_mesh fan triangulates quads") {
    const Mesh m = parse_mesh("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
    REQUIRE(m.triangles.size() == 2);
    CHECK(m.triangles[0] == Triangle{0, 1, 2});
    CHECK(m.triangles[1] == Triangle{0, 2, 3});
  }

  TEST_CASE("parse_mesh face count is sum of size minus two") {
    const Mesh m = parse_mesh(
        "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 0 0 1\nv 1 0 1\n"
        "f 1 2 3\nf 1 2 3 4\nf 1 2 3 4 5 6\n");
    CHECK(m.triangles.size() == 1 + 2 + 4);
    CHECK(m.vertices.size() == 6);
  }

  TEST_CASE("parse_mesh rejects out-of-range index with line number") {
    try {
      parse_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 5");
      FAIL("expected an error");
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("line 4") != std::string::npos);
      CHECK(msg.find('5') != std::string::npos);
    }
  }

  TEST_CASE("parse_mesh other errors") {
    CHECK_THROWS_AS(parse_mesh("v 0 0 0\nv 1 0 0\nf 1 2\n"), ValidationError);
    CHECK_THROWS_AS(parse_mesh("v 0 zero 0\n"), ValidationError);
    CHECK_THROWS_AS(parse_mesh("v 0 0 0\n"), ValidationError);  // no triangles
  }

  TEST_CASE("parse_mesh negative indices, comments, CRLF and texture corners") {
    const Mesh m = parse_mesh(
        "# header\r\nv 0 0 0\r\nv 1 0 0\r\nv 0 1 0\r\nvt 0 0\r\nvt 1 0\r\nvt 0 1\r\n"
        "usemtl ignored\r\nf -3/-3 -2/-2 -1/-1 # tail\r\n");
    REQUIRE(m.triangles.size() == 1);
    REQUIRE(m.uvs.size() == m.vertices.size());
    const auto& t = m.triangles[0];
    CHECK(m.vertices[t[1]] == Vec3{1, 0, 0});
    CHECK(m.uvs[t[2]] == Uv{0, 1});
  }

  TEST_CASE("compose_trs") {
    CHECK(compose_trs(Pose{}) == Mat4::identity());

    const Mat4 t = compose_trs(Pose{{1, 2, 3}, {}, 1.0});
    Mat4 expected = Mat4::identity();
    expected(0, 3) = 1;
    expected(1, 3) = 2;
    expected(2, 3) = 3;
    CHECK(t == expected);

    const Mat4 rz = compose_trs(Pose{{}, {0, 0, std::numbers::pi / 2}, 1.0});
    check_vec(rz.transform_point({1, 0, 0}), {0, 1, 0}, 1e-12);
  }

  TEST_CASE("compose_trs rotation order is x then y then z") {
    // Rotating (0,1,0) by 90 deg about x gives (0,0,1); then 90 deg about y
    // gives (1,0,0); then 90 deg about z gives (0,1,0).
    const double h = std::numbers::pi / 2;
    const Mat4 m = compose_trs(Pose{{}, {h, h, h}, 1.0});
    check_vec(m.transform_point({0, 1, 0}), {0, 1, 0}, 1e-12);
    check_vec(m.transform_point({1, 0, 0}), {0, 0, -1}, 1e-12);
    const Mat4 scaled = compose_trs(Pose{{1, 0, 0}, {}, 2.0});
    check_vec(scaled.transform_point({1, 1, 1}), {3, 2, 2}, 1e-15);
  }

  TEST_CASE("compute_aabb") {
    const Vec3 p{1, -2, 3};
    const Vec3 pts[] = {p};
    const Aabb single = compute_aabb(pts);
    CHECK(single.min == p);
    CHECK(single.max == p);

    std::vector<Vec3> cube;
    for (int k = 0; k < 8; ++k) cube.push_back({double(k & 1), double((k >> 1) & 1), double((k >> 2) & 1)});
    const Aabb box = compute_aabb(cube);
    CHECK(box.min == Vec3{0, 0, 0});
    CHECK(box.max == Vec3{1, 1, 1});

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5, 5);
    std::vector<Vec3> random;
    for (int i = 0; i < 100; ++i) random.push_back({u(rng), u(rng), u(rng)});
    Vec3 lo = random[0], hi = random[0];
    for (const auto& q : random) {
      lo = {std::min(lo.x, q.x), std::min(lo.y, q.y), std::min(lo.z, q.z)};
      hi = {std::max(hi.x, q.x), std::max(hi.y, q.y), std::max(hi.z, q.z)};
    }
    const Aabb r = compute_aabb(random);
    CHECK(r.min == lo);
    CHECK(r.max == hi);

    CHECK_THROWS_AS(compute_aabb(std::span<const Vec3>{}), ValidationError);
  }

  TEST_CASE("transformed aabb contains every transformed vertex") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 1);
    std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> sc(0.1, 3);
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<Vec3> pts;
      const int n = 4 + trial % 40;
      for (int i = 0; i < n; ++i) pts.push_back({u(rng), u(rng), u(rng)});
      const Pose pose{{u(rng), u(rng), u(rng)}, {ang(rng), ang(rng), ang(rng)}, sc(rng)};
      const auto moved = transform_points(compose_trs(pose), pts);
      const Aabb box = compute_aabb(moved);
      for (const auto& p : moved) REQUIRE(box.contains(p));
    }
  }

  TEST_CASE("look_at basics and numeric inverse") {
    const Mat4 v = look_at({0, 0, 1}, {0, 0, 0}, {0, 1, 0});
    check_vec(v.transform_point({0, 0, 0}), {0, 0, -1}, 1e-15);
    check_vec(v.transform_point({0, 0, 1}), {0, 0, 0}, 1e-15);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int trial = 0; trial < 200; ++trial) {
      const Vec3 eye{u(rng), u(rng), u(rng)};
      const Vec3 target{u(rng), u(rng), u(rng)};
      if (norm(eye - target) < 0.1) continue;
      const Mat4 m = look_at(eye, target, {0, 0, 1});
      check_vec(m.transform_point(eye), {}, 1e-12);
      const auto rows = testing::to_rows(m);
      const auto prod = testing::multiply(rows, testing::inverse(rows));
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) REQUIRE(std::abs(prod[i][j] - (i == j ? 1.0 : 0.0)) < 1e-9);
    }

    CHECK_THROWS_AS(look_at({0, 0, 1}, {0, 0, 1}, {0, 1, 0}), ValidationError);
    CHECK_THROWS_AS(look_at({0, 0, 1}, {0, 0, 0}, {0, 0, 1}), ValidationError);
  }

  TEST_CASE("perspective") {
    const double fov = 0.8, aspect = 4.0 / 3.0, n = 0.01, f = 10.0;
    const auto p = testing::to_rows(perspective(fov, aspect, n, f));

    const auto at_near = testing::apply(p, {0, 0, -n, 1});
    CHECK(at_near[2] / at_near[3] == Approx(-1.0).epsilon(1e-12));
    const auto at_far = testing::apply(p, {0, 0, -f, 1});
    CHECK(at_far[2] / at_far[3] == Approx(1.0).epsilon(1e-12));

    for (double d : {0.05, 0.5, 2.0, 9.0}) {
      const auto c = testing::apply(p, {0, 0, -d, 1});
      CHECK(c[0] == 0.0);
      CHECK(c[1] == 0.0);
      CHECK(c[3] == Approx(d));
    }

    // Off-axis: ndc_x = x / (z * aspect * tan(fov/2)).
    const double x = 0.3, y = -0.2, z = 1.7;
    const auto c = testing::apply(p, {x, y, -z, 1});
    const double t = std::tan(fov / 2);
    CHECK(c[0] / c[3] == Approx(x / (z * aspect * t)).epsilon(1e-12));
    CHECK(c[1] / c[3] == Approx(y / (z * t)).epsilon(1e-12));
  }

  TEST_CASE("project") {
    CameraModel cam;
    cam.eye = {0.4, -0.3, 0.25};
    cam.target = {0.02, 0.01, 0.0};
    cam.fov_y = 0.7;
    const Mat4 view = view_matrix(cam);
    const Mat4 proj = projection_matrix(cam);

    const auto center = project(cam.target, view, proj, cam.width, cam.height);
    REQUIRE(center);
    CHECK(center->px == Approx(cam.width / 2.0).epsilon(1e-9));
    CHECK(center->py == Approx(cam.height / 2.0).epsilon(1e-9));

    const Vec3 forward = normalized(cam.target - cam.eye);
    const auto near_pt = project(cam.eye + forward * cam.near, view, proj, cam.width, cam.height);
    REQUIRE(near_pt);
    CHECK(near_pt->depth == Approx(cam.near).epsilon(1e-12));

    CHECK_FALSE(project(cam.eye - forward, view, proj, cam.width, cam.height));

    // Cube corner against a pinhole model built from the camera basis.
    const Vec3 corner{0.05, 0.05, 0.05};
    const auto got = project(corner, view, proj, cam.width, cam.height);
    const auto want = testing::pinhole(cam.eye, cam.target, cam.up, cam.fov_y, cam.width, cam.height, corner);
    REQUIRE(got);
    CHECK(std::abs(got->px - want[0]) < 1e-6);
    CHECK(std::abs(got->py - want[1]) < 1e-6);
    CHECK(std::abs(got->depth - want[2]) < 1e-9);
  }

  TEST_CASE("project depth matches ray-plane distance") {
    CameraModel cam;
    cam.eye = {1, 1, 1};
    cam.target = {0, 0, 0};
    const Projector proj(cam);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    const Vec3 f = normalized(cam.target - cam.eye);
    for (int i = 0; i < 100; ++i) {
      const Vec3 p{u(rng), u(rng), u(rng)};
      const auto r = proj(p);
      REQUIRE(r);
      CHECK(r->depth == Approx(dot(p - cam.eye, f)).epsilon(1e-12));
    }
  }

  TEST_CASE("clip_to_pixel is invariant to positive clip scaling") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-2, 2);
    std::uniform_real_distribution<double> w(0.1, 5);
    std::uniform_real_distribution<double> lambda(0.01, 100);
    for (int i = 0; i < 500; ++i) {
      const Vec4 c{u(rng), u(rng), u(rng), w(rng)};
      const double l = lambda(rng);
      const auto a = clip_to_pixel(c, 640, 480);
      const auto b = clip_to_pixel({c[0] * l, c[1] * l, c[2] * l, c[3] * l}, 640, 480);
      REQUIRE(a);
      REQUIRE(b);
      CHECK(a->px == Approx(b->px).epsilon(1e-12));
      CHECK(a->py == Approx(b->py).epsilon(1e-12));
    }
    CHECK_FALSE(clip_to_pixel({0, 0, 0, 0}, 640, 480));
    CHECK_FALSE(clip_to_pixel({0, 0, 0, -1}, 640, 480));
  }

  TEST_CASE("camera_from_spherical") {
    const Vec3 t{0.1, -0.2, 0.3};
    check_vec(camera_from_spherical(t, 0, 0, 2).eye, t + Vec3{2, 0, 0}, 1e-15);

    const auto above = camera_from_spherical(t, 0.7, std::numbers::pi / 2, 1.5);
    check_vec(above.eye, t + Vec3{0, 0, 1.5}, 1e-12);
    CHECK_NOTHROW(look_at(above.eye, t, above.up));

    const auto below = camera_from_spherical(t, 0.7, -std::numbers::pi / 2, 1.5);
    CHECK_NOTHROW(look_at(below.eye, t, below.up));

    const double yaw = std::numbers::pi / 4, pitch = 0.17, d = 0.5;
    const Vec3 want = t + Vec3{d * std::cos(pitch) * std::cos(yaw), d * std::cos(pitch) * std::sin(yaw),
                               d * std::sin(pitch)};
    check_vec(camera_from_spherical(t, yaw, pitch, d).eye, want, 1e-12);
  }

  TEST_CASE("spherical camera aimed at target projects it to the image center") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1, 1);
    std::uniform_real_distribution<double> ang(-3.1, 3.1);
    std::uniform_real_distribution<double> pitch(-1.5, 1.5);
    std::uniform_real_distribution<double> dist(0.2, 3);
    for (int i = 0; i < 300; ++i) {
      CameraModel cam;
      cam.target = {u(rng), u(rng), u(rng)};
      const auto place = camera_from_spherical(cam.target, ang(rng), pitch(rng), dist(rng));
      cam.eye = place.eye;
      cam.up = place.up;
      cam.width = 641 + i;
      cam.height = 480;
      const auto p = Projector(cam)(cam.target);
      REQUIRE(p);
      CHECK(p->px == Approx(cam.width / 2.0).epsilon(1e-9));
      CHECK(p->py == Approx(cam.height / 2.0).epsilon(1e-9));
    }
  }

  TEST_CASE("mesh and camera validation") {
    Mesh m = testing::unit_cube();
    CHECK_NOTHROW(validate(m));
    m.triangles.push_back({0, 1, 8});
    CHECK_THROWS_AS(validate(m), ValidationError);
    m = testing::unit_cube();
    m.uvs = {{0, 0}};
    CHECK_THROWS_AS(validate(m), ValidationError);
    m = testing::unit_cube();
    m.vertices[0].x = std::nan("");
    CHECK_THROWS_AS(validate(m), ValidationError);

    CameraModel cam;
    CHECK_NOTHROW(validate(cam));
    cam.near = 20;
    CHECK_THROWS_AS(validate(cam), ValidationError);
    cam = {};
    cam.width = 0;
    CHECK_THROWS_AS(validate(cam), ValidationError);
    cam = {};
    cam.eye = cam.target;
    CHECK_THROWS_AS(validate(cam), ValidationError);
  }
}
