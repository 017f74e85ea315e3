#include "regrasp/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace regrasp {

namespace {

constexpr double kPlaneThickness = 1e-7;   // points within this of a plane are on it
constexpr double kHullVisibleEps = 1e-9;   // visibility threshold during hull expansion
constexpr double kNormalMergeTol = 1e-6;   // rad, coplanar-face normal agreement

}  // namespace

Transform::Transform(const Quat& q, const Vec3& t) : rotation(q), translation(t) {
    const double norm = rotation.norm();
    if (!std::isfinite(norm) || norm < 1e-6) {
        throw ValidationError("Transform: quaternion is degenerate");
    }
    if (std::abs(norm - 1.0) > 1e-3) {
        throw ValidationError("Transform: quaternion is far from unit length");
    }
    // Already-unit quaternions keep their exact bits (round-trip stability).
    if (std::abs(norm - 1.0) > 1e-12) rotation.normalize();
}

Transform Transform::from_translation(const Vec3& t) {
    Transform out;
    out.translation = t;
    return out;
}

Transform Transform::from_axis_angle(const Vec3& axis, double angle, const Vec3& t) {
    const double n = axis.norm();
    if (n < 1e-12) throw ValidationError("Transform: rotation axis is zero");
    return Transform(Quat(Eigen::AngleAxisd(angle, axis / n)), t);
}

Transform Transform::rot_z(double angle, const Vec3& t) {
    return from_axis_angle(Vec3::UnitZ(), angle, t);
}

Transform Transform::operator*(const Transform& other) const {
    Transform out;
    out.rotation = (rotation * other.rotation).normalized();
    out.translation = translation + rotation * other.translation;
    return out;
}

Vec3 Transform::operator*(const Vec3& point) const {
    return rotation * point + translation;
}

Transform Transform::inverse() const {
    Transform out;
    out.rotation = rotation.conjugate();
    out.translation = -(out.rotation * translation);
    return out;
}

bool Transform::approx_equal(const Transform& other, double tol) const {
    return (translation - other.translation).norm() <= tol &&
           rotation_distance(rotation, other.rotation) <= tol;
}

double rotation_distance(const Quat& a, const Quat& b) {
    const Quat rel = a.conjugate() * b;
    return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

Box::Box(const Vec3& half, const Transform& pose) : half_extents(half), local_pose(pose) {
    if (!(half.x() > 0.0 && half.y() > 0.0 && half.z() > 0.0)) {
        throw ValidationError("Box: half-extents must be strictly positive");
    }
}

std::vector<Vec3> Box::corners() const {
    std::vector<Vec3> out;
    out.reserve(8);
    for (int sx : {-1, 1})
        for (int sy : {-1, 1})
            for (int sz : {-1, 1})
                out.push_back(local_pose * Vec3(sx * half_extents.x(), sy * half_extents.y(),
                                                sz * half_extents.z()));
    return out;
}

namespace {

// Projection radius of an oriented box onto a unit axis.
double projection_radius(const Eigen::Matrix3d& rot, const Vec3& half, const Vec3& axis) {
    return half.x() * std::abs(axis.dot(rot.col(0))) + half.y() * std::abs(axis.dot(rot.col(1))) +
           half.z() * std::abs(axis.dot(rot.col(2)));
}

// Runs the 15-axis SAT test. Returns the maximum of (center distance - radii)
// over all valid axes; > -clearance means the pair counts as separated.
double sat_max_separation(const Box& box_a, const Transform& pose_a, const Box& box_b,
                          const Transform& pose_b) {
    const Transform wa = pose_a * box_a.local_pose;
    const Transform wb = pose_b * box_b.local_pose;
    const Eigen::Matrix3d ra = wa.rotation_matrix();
    const Eigen::Matrix3d rb = wb.rotation_matrix();
    const Vec3 d = wb.translation - wa.translation;

    double best = -std::numeric_limits<double>::infinity();
    auto test_axis = [&](const Vec3& axis) {
        const double n = axis.norm();
        if (n < 1e-9) return;  // near-parallel edge pair, axis degenerate
        const Vec3 u = axis / n;
        const double dist = std::abs(d.dot(u));
        const double r = projection_radius(ra, box_a.half_extents, u) +
                         projection_radius(rb, box_b.half_extents, u);
        best = std::max(best, dist - r);
    };

    for (int i = 0; i < 3; ++i) test_axis(ra.col(i));
    for (int i = 0; i < 3; ++i) test_axis(rb.col(i));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) test_axis(ra.col(i).cross(rb.col(j)));
    return best;
}

}  // namespace

bool obb_overlap(const Box& box_a, const Transform& pose_a, const Box& box_b,
                 const Transform& pose_b) {
    return sat_max_separation(box_a, pose_a, box_b, pose_b) < -kContactClearance;
}

double obb_separation(const Box& box_a, const Transform& pose_a, const Box& box_b,
                      const Transform& pose_b) {
    return sat_max_separation(box_a, pose_a, box_b, pose_b);
}

Vec2 HullFace::project(const Vec3& point) const {
    const Vec3 rel = point - centroid;
    return {rel.dot(basis_u), rel.dot(basis_v)};
}

namespace {

struct HullTriangle {
    int a, b, c;
    Vec3 normal;    // unit, outward
    double offset;  // normal . x = offset on the plane
    bool alive = true;
};

HullTriangle make_triangle(int a, int b, int c, const std::vector<Vec3>& pts,
                           const Vec3& interior) {
    HullTriangle t{a, b, c, Vec3::Zero(), 0.0, true};
    Vec3 n = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
    const double len = n.norm();
    if (len < 1e-14) throw DegenerateInputError("convex_hull: degenerate triangle");
    n /= len;
    if (n.dot(interior - pts[a]) > 0.0) {
        std::swap(t.b, t.c);
        n = -n;
    }
    t.normal = n;
    t.offset = n.dot(pts[t.a]);
    return t;
}

std::vector<Vec2> convex_hull_2d(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](const Vec2& p, const Vec2& q) {
        return p.x() < q.x() || (p.x() == q.x() && p.y() < q.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Vec2& p, const Vec2& q) { return (p - q).norm() < 1e-12; }),
              pts.end());
    const int n = static_cast<int>(pts.size());
    if (n < 3) throw DegenerateInputError("convex_hull: face with fewer than 3 vertices");
    auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
        return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    std::vector<Vec2> hull(2 * n);
    int k = 0;
    for (int i = 0; i < n; ++i) {  // lower chain
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 1e-14) --k;
        hull[k++] = pts[i];
    }
    for (int i = n - 2, lo = k + 1; i >= 0; --i) {  // upper chain
        while (k >= lo && cross(hull[k - 2], hull[k - 1], pts[i]) <= 1e-14) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;  // CCW
}

}  // namespace

std::vector<HullFace> convex_hull(const std::vector<Vec3>& points) {
    // Dedupe input.
    std::vector<Vec3> pts;
    for (const Vec3& p : points) {
        bool dup = false;
        for (const Vec3& q : pts)
            if ((p - q).norm() < 1e-10) {
                dup = true;
                break;
            }
        if (!dup) pts.push_back(p);
    }
    const int n = static_cast<int>(pts.size());
    if (n < 4) throw DegenerateInputError("convex_hull: need at least 4 distinct points");

    // Initial simplex: spread pair, then farthest from line, then from plane.
    int i0 = 0, i1 = 1;
    double best = -1.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double d = (pts[i] - pts[j]).squaredNorm();
            if (d > best) {
                best = d;
                i0 = i;
                i1 = j;
            }
        }
    const Vec3 dir = (pts[i1] - pts[i0]).normalized();
    int i2 = -1;
    best = 1e-14;
    for (int i = 0; i < n; ++i) {
        const Vec3 rel = pts[i] - pts[i0];
        const double d = (rel - rel.dot(dir) * dir).squaredNorm();
        if (d > best) {
            best = d;
            i2 = i;
        }
    }
    if (i2 < 0) throw DegenerateInputError("convex_hull: input points are collinear");
    Vec3 plane_n = (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]).normalized();
    int i3 = -1;
    best = kPlaneThickness;
    for (int i = 0; i < n; ++i) {
        const double d = std::abs(plane_n.dot(pts[i] - pts[i0]));
        if (d > best) {
            best = d;
            i3 = i;
        }
    }
    if (i3 < 0) throw DegenerateInputError("convex_hull: input points are coplanar");

    const Vec3 interior = (pts[i0] + pts[i1] + pts[i2] + pts[i3]) / 4.0;
    std::vector<HullTriangle> tris;
    tris.push_back(make_triangle(i0, i1, i2, pts, interior));
    tris.push_back(make_triangle(i0, i1, i3, pts, interior));
    tris.push_back(make_triangle(i0, i2, i3, pts, interior));
    tris.push_back(make_triangle(i1, i2, i3, pts, interior));

    // Incremental expansion.
    for (int p = 0; p < n; ++p) {
        std::vector<int> visible;
        for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
            if (!tris[t].alive) continue;
            if (tris[t].normal.dot(pts[p]) - tris[t].offset > kHullVisibleEps) visible.push_back(t);
        }
        if (visible.empty()) continue;

        std::set<std::pair<int, int>> directed;
        for (int t : visible) {
            directed.insert({tris[t].a, tris[t].b});
            directed.insert({tris[t].b, tris[t].c});
            directed.insert({tris[t].c, tris[t].a});
        }
        std::vector<std::pair<int, int>> horizon;
        for (const auto& e : directed) {
            if (!directed.count({e.second, e.first})) horizon.push_back(e);
        }
        for (int t : visible) tris[t].alive = false;
        for (const auto& e : horizon) {
            tris.push_back(make_triangle(e.first, e.second, p, pts, interior));
        }
    }

    // Merge coplanar triangles into polygonal faces.
    struct FaceGroup {
        Vec3 normal;
        double offset;
    };
    std::vector<FaceGroup> groups;
    for (const HullTriangle& t : tris) {
        if (!t.alive) continue;
        bool found = false;
        for (FaceGroup& g : groups) {
            if (t.normal.cross(g.normal).norm() < kNormalMergeTol && t.normal.dot(g.normal) > 0.0 &&
                std::abs(t.offset - g.offset) < kPlaneThickness) {
                found = true;
                break;
            }
        }
        if (!found) groups.push_back({t.normal, t.offset});
    }

    std::vector<HullFace> faces;
    for (const FaceGroup& g : groups) {
        HullFace face;
        face.outward_normal = g.normal;
        face.plane_offset = g.offset;
        // In-plane basis with u x v = n.
        const Vec3 helper = std::abs(g.normal.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
        face.basis_u = helper.cross(g.normal).normalized();
        face.basis_v = g.normal.cross(face.basis_u);

        // All input points on the plane, not just triangulation vertices.
        std::vector<Vec2> flat;
        Vec3 anchor = Vec3::Zero();
        int on_plane = 0;
        for (const Vec3& p : pts) {
            if (std::abs(g.normal.dot(p) - g.offset) < kPlaneThickness) {
                anchor += p;
                ++on_plane;
            }
        }
        anchor /= std::max(on_plane, 1);
        for (const Vec3& p : pts) {
            if (std::abs(g.normal.dot(p) - g.offset) < kPlaneThickness) {
                const Vec3 rel = p - anchor;
                flat.push_back({rel.dot(face.basis_u), rel.dot(face.basis_v)});
            }
        }
        const std::vector<Vec2> poly = convex_hull_2d(flat);

        // Polygon centroid and area via the shoelace formula.
        double area2 = 0.0;
        Vec2 cen2(0.0, 0.0);
        const int m = static_cast<int>(poly.size());
        for (int i = 0; i < m; ++i) {
            const Vec2& p = poly[i];
            const Vec2& q = poly[(i + 1) % m];
            const double w = p.x() * q.y() - q.x() * p.y();
            area2 += w;
            cen2 += w * (p + q);
        }
        face.area = 0.5 * area2;
        if (face.area <= 1e-12) continue;  // sliver from merge tolerance
        cen2 /= (6.0 * face.area);
        face.centroid = anchor + cen2.x() * face.basis_u + cen2.y() * face.basis_v;
        face.support_polygon.reserve(m);
        face.vertices.reserve(m);
        for (const Vec2& p : poly) {
            face.support_polygon.push_back(p - cen2);
            face.vertices.push_back(anchor + p.x() * face.basis_u + p.y() * face.basis_v);
        }
        faces.push_back(std::move(face));
    }
    return faces;
}

bool point_in_polygon(const std::vector<Vec2>& polygon, const Vec2& p, double margin) {
    const int n = static_cast<int>(polygon.size());
    if (n < 3) return false;
    for (int i = 0; i < n; ++i) {
        const Vec2& a = polygon[i];
        const Vec2& b = polygon[(i + 1) % n];
        const Vec2 e = b - a;
        const double len = e.norm();
        if (len < 1e-12) continue;
        const double inward = (e.x() * (p.y() - a.y()) - e.y() * (p.x() - a.x())) / len;
        if (inward < margin) return false;
    }
    return true;
}

Vec3 volume_weighted_centroid(const std::vector<Box>& boxes) {
    if (boxes.empty()) throw ValidationError("centroid: object has no boxes");
    Vec3 acc = Vec3::Zero();
    double vol = 0.0;
    for (const Box& b : boxes) {
        acc += b.volume() * b.center();
        vol += b.volume();
    }
    return acc / vol;
}

std::vector<PlacementClass> stable_placement_classes(const std::vector<Box>& boxes) {
    return stable_placement_classes(boxes, volume_weighted_centroid(boxes));
}

std::vector<PlacementClass> stable_placement_classes(const std::vector<Box>& boxes,
                                                     const Vec3& com) {
    std::vector<Vec3> pts;
    for (const Box& b : boxes) {
        const auto c = b.corners();
        pts.insert(pts.end(), c.begin(), c.end());
    }
    std::vector<HullFace> faces = convex_hull(pts);

    std::vector<PlacementClass> classes;
    for (HullFace& f : faces) {
        const Vec2 com2 = f.project(com);
        if (point_in_polygon(f.support_polygon, com2, kStabilityMargin)) {
            classes.push_back({0, std::move(f), com});
        }
    }
    if (classes.empty()) {
        throw NoStablePlacementError("stable_placement_classes: no face supports the COM");
    }
    std::sort(classes.begin(), classes.end(), [](const PlacementClass& a, const PlacementClass& b) {
        if (std::abs(a.face.area - b.face.area) > 1e-9) return a.face.area > b.face.area;
        const Vec3& na = a.face.outward_normal;
        const Vec3& nb = b.face.outward_normal;
        for (int i = 0; i < 3; ++i) {
            if (std::abs(na[i] - nb[i]) > 1e-9) return na[i] < nb[i];
        }
        return false;
    });
    for (int i = 0; i < static_cast<int>(classes.size()); ++i) classes[i].index = i + 1;
    return classes;
}

}  // namespace regrasp
