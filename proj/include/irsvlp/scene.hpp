#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "irsvlp/rng.hpp"
#include "irsvlp/vec3.hpp"

namespace irsvlp {

/// LED transmitter: position, pointing direction, Lambertian order, transmit power.
struct Led {
    Vec3 position;
    UnitVec3 orientation;
    double lambertian_order = 1.0; // >= 1
    double tx_power = 0.0;         // watts, > 0
};

/// Phong reflection parameters shared by the elements of one IRS array.
struct PhongParams {
    double reflectance = 0.95;      // rho, in [0, 1]
    double diffuse_fraction = 0.0;  // r, in [0, 1]
    double directivity = 5.0;       // mu, >= 0
};

/// One mirror of the IRS: a w x h rectangle on a wall. The footprint (center
/// plus tangent basis) lies in the wall plane; the orientation pair describes
/// the mirror normal the system assumes vs. the one it actually has.
struct IrsElement {
    Vec3 center;
    UnitVec3 assumed_orientation;
    UnitVec3 true_orientation;
    double width = 0.0;  // m, along tangent_u
    double height = 0.0; // m, along tangent_v
    double reflectance = 0.95;
    double diffuse_fraction = 0.0;
    double directivity = 5.0;
    int wall_id = 0;     // 1..4
    UnitVec3 tangent_u;  // wall-plane basis, horizontal
    UnitVec3 tangent_v;  // wall-plane basis, vertical

    double area() const { return width * height; }
};

/// Rectangular-grid IRS layout (one grid per wall), kept so a scene can be
/// serialized compactly and rebuilt exactly.
struct IrsLayout {
    int per_wall_count = 0;   // perfect square; 0 = no IRS
    double element_width = 0.04;
    double element_height = 0.02;
    double h_gap = 0.02;
    double v_gap = 0.01;
    PhongParams phong;
};

/// Immutable world description. Construct once, share across workers.
struct Scene {
    std::vector<Led> leds;
    std::vector<IrsElement> irs;
    UnitVec3 receiver_orientation = UnitVec3{Vec3{0, 0, 1}};
    double pd_area = 1e-4;                  // A_R, m^2
    std::vector<double> noise_variances;    // sigma_i^2, W^2, one per LED
    Box search_region;                      // candidate receiver positions
    bool los_blocked = false;

    IrsLayout irs_layout; // provenance of `irs`; per_wall_count 0 when hand-built
    Box room;             // walls live on the room's x/y faces

    size_t num_leds() const { return leds.size(); }
    size_t num_elements() const { return irs.size(); }
};

/// Inward unit normal of wall 1..4 (walls at y=lo, y=hi, x=lo, x=hi).
UnitVec3 wall_inward_normal(int wall_id);

/// Center point of wall 1..4 of `room`.
Vec3 wall_center(const Box& room, int wall_id);

/// Spherical angles of the four inward wall normals, re-derived from the
/// vectors via unit_to_spherical.
std::array<SphericalAngles, 4> wall_assumed_angles();

/// Builds 4 * per_wall_count elements, one sqrt(count) x sqrt(count) grid per
/// wall, centered on the wall both horizontally and vertically. Assumed and
/// true orientations are both initialized to the inward wall normals.
/// Throws GridOverflowError when a grid exceeds its wall, std::invalid_argument
/// when per_wall_count is not a perfect square.
std::vector<IrsElement> build_irs_array(int per_wall_count, double element_width,
                                        double element_height, double h_gap, double v_gap,
                                        const Box& room, const PhongParams& phong);

/// One independent (theta, phi) ~ U(-k, k)^2 perturbation per wall, applied to
/// the given assumed angles. Draw order: wall 1..4, theta before phi.
/// k = 0 reproduces the assumed orientations exactly.
std::array<UnitVec3, 4> perturb_wall_orientations(const std::array<SphericalAngles, 4>& assumed,
                                                  double k, Rng& rng);

/// Overwrites every element's true orientation with its wall's vector.
void set_true_orientations(Scene& scene, const std::array<UnitVec3, 4>& wall_orientations);

/// Accumulated invariant violations; empty = valid scene.
struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

/// Checks every type invariant plus cross-field consistency (elements on their
/// wall planes, receiver search region inside the room, positive variances).
ValidationReport scene_validate(const Scene& scene);

/// JSON document round-trip (keys: leds[], irs_layout{}, receiver{}, noise{},
/// search_region{}, los_blocked, room{}). Lengths in meters, powers in watts,
/// angles in radians.
std::string scene_to_json(const Scene& scene, int indent = 2);
Scene scene_from_json(const std::string& json_text);

/// FNV-1a hash of the canonical (indent-less) JSON serialization.
uint64_t scene_hash(const Scene& scene);

} // namespace irsvlp
