#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "regrasp/geometry.hpp"
#include "test_helpers.hpp"

using namespace regrasp;
using namespace regrasp::testing;

namespace {

Transform random_transform(Rng& rng, double span = 1.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Quat q = Quat(u(rng), u(rng), u(rng), u(rng)).normalized();
    return Transform(q, Vec3(span * u(rng), span * u(rng), span * u(rng)));
}

}  // namespace

TEST_CASE("transform compose, invert, apply") {
    const Transform eye = Transform::identity();
    CHECK((eye * eye).approx_equal(eye));

    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
        const Transform t = random_transform(rng);
        CHECK((t * t.inverse()).approx_equal(eye, 1e-9));
        CHECK((t.inverse() * t).approx_equal(eye, 1e-9));
    }

    const Transform rot90 = Transform::rot_z(M_PI / 2.0);
    const Vec3 p = rot90 * Vec3(1.0, 0.0, 0.0);
    CHECK((p - Vec3(0.0, 1.0, 0.0)).norm() < 1e-9);

    // Composition is associative.
    for (int i = 0; i < 50; ++i) {
        const Transform a = random_transform(rng);
        const Transform b = random_transform(rng);
        const Transform c = random_transform(rng);
        CHECK(((a * b) * c).approx_equal(a * (b * c), 1e-9));
    }
}

TEST_CASE("obb_overlap basic cases") {
    const Box unit({0.5, 0.5, 0.5});
    const Transform eye = Transform::identity();
    CHECK(obb_overlap(unit, eye, unit, eye));
    CHECK_FALSE(obb_overlap(unit, eye, unit, Transform::from_translation({10.0, 0.0, 0.0})));

    // Exact face contact stays collision-free under the clearance rule.
    const Transform touching = Transform::from_translation({1.0, 0.0, 0.0});
    CHECK_FALSE(obb_overlap(unit, eye, unit, touching));
    // No interior point of A lies inside B at contact.
    for (const Vec3& p : obb_lattice(unit, eye, 13)) {
        CHECK_FALSE(point_in_obb(p, unit, touching, kContactClearance));
    }
    // Push past the clearance and they overlap.
    CHECK(obb_overlap(unit, eye, unit, Transform::from_translation({1.0 - 1e-4, 0.0, 0.0})));
}

TEST_CASE("obb_overlap is symmetric") {
    Rng rng(11);
    std::uniform_real_distribution<double> dim(0.05, 0.4);
    for (int i = 0; i < 1000; ++i) {
        const Box a({dim(rng), dim(rng), dim(rng)});
        const Box b({dim(rng), dim(rng), dim(rng)});
        const Transform ta = random_transform(rng, 0.4);
        const Transform tb = random_transform(rng, 0.4);
        CHECK(obb_overlap(a, ta, b, tb) == obb_overlap(b, tb, a, ta));
    }
}

TEST_CASE("obb_overlap agrees with the point-membership oracle near contact") {
    Rng rng(13);
    std::uniform_real_distribution<double> dim(0.1, 0.35);
    int tested = 0;
    while (tested < 200) {
        const Box a({dim(rng), dim(rng), dim(rng)});
        const Box b({dim(rng), dim(rng), dim(rng)});
        const Transform ta = random_transform(rng, 0.15);
        const Transform tb = random_transform(rng, 0.15);
        const double sep = obb_separation(a, ta, b, tb);
        // Near contact but outside the lattice resolution's ambiguity band.
        if (std::abs(sep) < 0.004 || std::abs(sep) > 0.05) continue;
        ++tested;

        bool oracle = false;
        for (const Vec3& p : obb_lattice(a, ta, 22)) {
            if (point_in_obb(p, b, tb, kContactClearance)) {
                oracle = true;
                break;
            }
        }
        if (!oracle) {
            for (const Vec3& p : obb_lattice(b, tb, 22)) {
                if (point_in_obb(p, a, ta, kContactClearance)) {
                    oracle = true;
                    break;
                }
            }
        }
        CHECK(obb_overlap(a, ta, b, tb) == oracle);
    }
}

TEST_CASE("convex hull of a box") {
    const Box box({0.14, 0.0245, 0.0125});
    auto faces = convex_hull(box.corners());
    CHECK(faces.size() == 6);

    // Interior points do not change the hull.
    auto pts = box.corners();
    pts.push_back({0.0, 0.0, 0.0});
    pts.push_back({0.01, 0.002, 0.001});
    auto faces2 = convex_hull(pts);
    CHECK(faces2.size() == 6);

    double area = 0.0;
    for (const auto& f : faces) area += f.area;
    const double expect = 8.0 * (0.14 * 0.0245 + 0.14 * 0.0125 + 0.0245 * 0.0125);
    CHECK(area == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("convex hull rejects degenerate input") {
    CHECK_THROWS_AS(convex_hull({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}), DegenerateInputError);
    CHECK_THROWS_AS(convex_hull({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}}),
                    DegenerateInputError);
    CHECK_THROWS_AS(convex_hull({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {0.3, 0.4, 0}}),
                    DegenerateInputError);
}

TEST_CASE("convex hull matches the brute-force oracle on an L-shape") {
    const Box bar({0.10, 0.025, 0.025});
    const Box post({0.025, 0.025, 0.0375},
                   Transform::from_translation({0.075, 0.0, 0.0625}));
    std::vector<Vec3> pts = bar.corners();
    const auto pc = post.corners();
    pts.insert(pts.end(), pc.begin(), pc.end());

    const auto mine = convex_hull(pts);
    const auto oracle = brute_force_hull(pts);
    REQUIRE(mine.size() == oracle.size());

    std::vector<double> a1, a2;
    for (const auto& f : mine) a1.push_back(f.area);
    for (const auto& f : oracle) a2.push_back(f.area);
    std::sort(a1.begin(), a1.end());
    std::sort(a2.begin(), a2.end());
    for (std::size_t i = 0; i < a1.size(); ++i) {
        CHECK(a1[i] == doctest::Approx(a2[i]).epsilon(1e-9));
    }
}

TEST_CASE("every input point lies on or inside every hull face plane") {
    Rng rng(17);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Vec3> pts;
        for (int i = 0; i < 30; ++i) pts.push_back({u(rng), u(rng), u(rng)});
        for (const auto& f : convex_hull(pts)) {
            for (const Vec3& p : pts) {
                CHECK(f.outward_normal.dot(p) - f.plane_offset <= 1e-7);
            }
        }
    }
}

TEST_CASE("stable placements of a cube") {
    const std::vector<Box> cube{Box({0.05, 0.05, 0.05})};
    const auto classes = stable_placement_classes(cube);
    CHECK(classes.size() == 6);
    for (const auto& c : classes) {
        CHECK(c.face.area == doctest::Approx(0.01));
    }
}

TEST_CASE("placement classes of the reference box") {
    const auto classes = stable_placement_classes(paper_box().boxes);
    REQUIRE(classes.size() == 6);
    // Deterministic ordering: flat pair first (largest faces), standing last.
    CHECK(classes[0].face.area == doctest::Approx(0.28 * 0.049));
    CHECK(classes[2].face.area == doctest::Approx(0.28 * 0.025));
    CHECK(classes[4].face.area == doctest::Approx(0.049 * 0.025));
}

TEST_CASE("knife-edge placements are rejected") {
    // COM projecting within the margin of a support-polygon edge: those faces
    // must drop out. Only the +-y faces keep the COM comfortably inside.
    const Box slab({0.05, 0.05, 0.005});
    const Vec3 com(0.0, 0.0499, 0.0);
    const auto classes = stable_placement_classes({slab}, com);
    CHECK(classes.size() == 2);
    for (const auto& c : classes) {
        CHECK(std::abs(std::abs(c.face.outward_normal.y()) - 1.0) < 1e-9);
    }

    CHECK_THROWS_AS(stable_placement_classes({slab}, Vec3(0.2, 0.2, 0.2)),
                    NoStablePlacementError);
}
