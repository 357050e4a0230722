#include "irsvlp/scene.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "irsvlp/errors.hpp"

namespace irsvlp {

using nlohmann::json;

UnitVec3 wall_inward_normal(int wall_id) {
    switch (wall_id) {
        case 1: return UnitVec3{Vec3{0, 1, 0}};   // wall y = lo
        case 2: return UnitVec3{Vec3{0, -1, 0}};  // wall y = hi
        case 3: return UnitVec3{Vec3{1, 0, 0}};   // wall x = lo
        case 4: return UnitVec3{Vec3{-1, 0, 0}};  // wall x = hi
        default: throw std::invalid_argument("wall_id must be 1..4");
    }
}

Vec3 wall_center(const Box& room, int wall_id) {
    const Vec3 c = room.center();
    switch (wall_id) {
        case 1: return {c.x, room.lo.y, c.z};
        case 2: return {c.x, room.hi.y, c.z};
        case 3: return {room.lo.x, c.y, c.z};
        case 4: return {room.hi.x, c.y, c.z};
        default: throw std::invalid_argument("wall_id must be 1..4");
    }
}

std::array<SphericalAngles, 4> wall_assumed_angles() {
    std::array<SphericalAngles, 4> a;
    for (int w = 1; w <= 4; ++w) a[static_cast<size_t>(w - 1)] = unit_to_spherical(wall_inward_normal(w));
    return a;
}

namespace {

// Horizontal in-wall direction for wall 1..4; vertical is always +z.
UnitVec3 wall_tangent_u(int wall_id) {
    switch (wall_id) {
        case 1: return UnitVec3{Vec3{1, 0, 0}};
        case 2: return UnitVec3{Vec3{1, 0, 0}};
        case 3: return UnitVec3{Vec3{0, 1, 0}};
        case 4: return UnitVec3{Vec3{0, 1, 0}};
        default: throw std::invalid_argument("wall_id must be 1..4");
    }
}

// Wall extent along its horizontal tangent.
double wall_width(const Box& room, int wall_id) {
    const Vec3 e = room.extent();
    return (wall_id <= 2) ? e.x : e.y;
}

} // namespace

std::vector<IrsElement> build_irs_array(int per_wall_count, double element_width,
                                        double element_height, double h_gap, double v_gap,
                                        const Box& room, const PhongParams& phong) {
    if (per_wall_count <= 0) throw std::invalid_argument("per_wall_count must be positive");
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(per_wall_count))));
    if (side * side != per_wall_count)
        throw std::invalid_argument("per_wall_count must be a perfect square");
    if (element_width <= 0 || element_height <= 0 || h_gap < 0 || v_gap < 0)
        throw std::invalid_argument("element dimensions must be positive, gaps nonnegative");

    const double span_w = side * element_width + (side - 1) * h_gap;
    const double span_h = side * element_height + (side - 1) * v_gap;
    const double wall_h = room.extent().z;

    std::vector<IrsElement> elements;
    elements.reserve(static_cast<size_t>(4 * per_wall_count));
    for (int wall = 1; wall <= 4; ++wall) {
        const double wall_w = wall_width(room, wall);
        if (span_w > wall_w || span_h > wall_h) {
            std::ostringstream msg;
            msg << "IRS grid (" << span_w << " x " << span_h << " m) exceeds wall " << wall
                << " (" << wall_w << " x " << wall_h << " m)";
            throw GridOverflowError(msg.str());
        }
        const Vec3 center = wall_center(room, wall);
        const UnitVec3 normal = wall_inward_normal(wall);
        const UnitVec3 tu = wall_tangent_u(wall);
        const UnitVec3 tv{Vec3{0, 0, 1}};
        const double pitch_u = element_width + h_gap;
        const double pitch_v = element_height + v_gap;
        for (int row = 0; row < side; ++row) {
            for (int col = 0; col < side; ++col) {
                IrsElement e{
                    .center = center + tu.vec() * ((col - (side - 1) / 2.0) * pitch_u) +
                              tv.vec() * ((row - (side - 1) / 2.0) * pitch_v),
                    .assumed_orientation = normal,
                    .true_orientation = normal,
                    .width = element_width,
                    .height = element_height,
                    .reflectance = phong.reflectance,
                    .diffuse_fraction = phong.diffuse_fraction,
                    .directivity = phong.directivity,
                    .wall_id = wall,
                    .tangent_u = tu,
                    .tangent_v = tv,
                };
                elements.push_back(e);
            }
        }
    }
    return elements;
}

std::array<UnitVec3, 4> perturb_wall_orientations(const std::array<SphericalAngles, 4>& assumed,
                                                  double k, Rng& rng) {
    if (k < 0) throw std::invalid_argument("perturbation half-width k must be >= 0");
    std::array<UnitVec3, 4> out{UnitVec3{Vec3{0, 0, 1}}, UnitVec3{Vec3{0, 0, 1}},
                                UnitVec3{Vec3{0, 0, 1}}, UnitVec3{Vec3{0, 0, 1}}};
    for (size_t w = 0; w < 4; ++w) {
        SphericalAngles a = assumed[w];
        if (k > 0) {
            a.theta += rng.uniform(-k, k);
            a.phi += rng.uniform(-k, k);
        }
        out[w] = spherical_to_unit(a);
    }
    return out;
}

void set_true_orientations(Scene& scene, const std::array<UnitVec3, 4>& wall_orientations) {
    for (auto& e : scene.irs) {
        if (e.wall_id < 1 || e.wall_id > 4)
            throw std::invalid_argument("IrsElement wall_id out of range");
        e.true_orientation = wall_orientations[static_cast<size_t>(e.wall_id - 1)];
    }
}

namespace {

void check(ValidationReport& rep, bool ok, const std::string& msg) {
    if (!ok) rep.violations.push_back(msg);
}

// Signed distance of a point to the wall plane of wall_id.
double wall_plane_offset(const Box& room, int wall_id, const Vec3& p) {
    switch (wall_id) {
        case 1: return p.y - room.lo.y;
        case 2: return p.y - room.hi.y;
        case 3: return p.x - room.lo.x;
        case 4: return p.x - room.hi.x;
        default: return std::numeric_limits<double>::quiet_NaN();
    }
}

} // namespace

ValidationReport scene_validate(const Scene& scene) {
    ValidationReport rep;
    check(rep, !scene.leds.empty(), "scene must contain at least one LED");
    for (size_t i = 0; i < scene.leds.size(); ++i) {
        const auto& led = scene.leds[i];
        const std::string tag = "led[" + std::to_string(i) + "]: ";
        check(rep, led.position.finite(), tag + "position must be finite");
        check(rep, led.tx_power > 0, tag + "tx_power must be > 0");
        check(rep, led.lambertian_order >= 1, tag + "lambertian_order must be >= 1");
    }
    check(rep, scene.noise_variances.size() == scene.leds.size(),
          "noise_variances must have one entry per LED");
    for (size_t i = 0; i < scene.noise_variances.size(); ++i)
        check(rep, scene.noise_variances[i] > 0,
              "noise variance [" + std::to_string(i) + "] must be > 0");
    check(rep, scene.pd_area > 0, "pd_area must be > 0");
    check(rep, !scene.search_region.degenerate(), "search_region must have positive volume");
    check(rep, !scene.room.degenerate(), "room must have positive volume");
    check(rep,
          scene.search_region.lo.x >= scene.room.lo.x - 1e-12 &&
              scene.search_region.hi.x <= scene.room.hi.x + 1e-12 &&
              scene.search_region.lo.y >= scene.room.lo.y - 1e-12 &&
              scene.search_region.hi.y <= scene.room.hi.y + 1e-12 &&
              scene.search_region.lo.z >= scene.room.lo.z - 1e-12 &&
              scene.search_region.hi.z <= scene.room.hi.z + 1e-12,
          "search_region must lie inside the room");

    for (size_t k = 0; k < scene.irs.size(); ++k) {
        const auto& e = scene.irs[k];
        const std::string tag = "irs[" + std::to_string(k) + "]: ";
        check(rep, e.area() > 0, tag + "area must be > 0");
        check(rep, e.reflectance >= 0 && e.reflectance <= 1,
              tag + "reflectance must be in [0, 1]");
        check(rep, e.diffuse_fraction >= 0 && e.diffuse_fraction <= 1,
              tag + "diffuse_fraction must be in [0, 1]");
        check(rep, e.directivity >= 0, tag + "directivity must be >= 0");
        check(rep, e.wall_id >= 1 && e.wall_id <= 4, tag + "wall_id must be 1..4");
        if (e.wall_id >= 1 && e.wall_id <= 4) {
            check(rep, std::abs(wall_plane_offset(scene.room, e.wall_id, e.center)) <= 1e-12,
                  tag + "center must lie on its wall plane");
            const UnitVec3 n = wall_inward_normal(e.wall_id);
            check(rep, std::abs(dot(e.tangent_u.vec(), n.vec())) <= 1e-12 &&
                           std::abs(dot(e.tangent_v.vec(), n.vec())) <= 1e-12 &&
                           std::abs(dot(e.tangent_u.vec(), e.tangent_v.vec())) <= 1e-12,
                  tag + "tangent basis must be orthonormal and span the wall plane");
        }
    }
    return rep;
}

namespace {

json vec_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("expected a 3-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json box_to_json(const Box& b) {
    return json{{"lo", vec_to_json(b.lo)}, {"hi", vec_to_json(b.hi)}};
}

Box box_from_json(const json& j) {
    return {vec_from_json(j.at("lo")), vec_from_json(j.at("hi"))};
}

json scene_to_json_obj(const Scene& s) {
    json j;
    j["leds"] = json::array();
    for (const auto& led : s.leds) {
        j["leds"].push_back(json{{"position", vec_to_json(led.position)},
                                 {"orientation", vec_to_json(led.orientation.vec())},
                                 {"lambertian_order", led.lambertian_order},
                                 {"tx_power", led.tx_power}});
    }
    json layout{{"per_wall_count", s.irs_layout.per_wall_count},
                {"element_width", s.irs_layout.element_width},
                {"element_height", s.irs_layout.element_height},
                {"h_gap", s.irs_layout.h_gap},
                {"v_gap", s.irs_layout.v_gap},
                {"reflectance", s.irs_layout.phong.reflectance},
                {"diffuse_fraction", s.irs_layout.phong.diffuse_fraction},
                {"directivity", s.irs_layout.phong.directivity}};
    if (s.irs_layout.per_wall_count > 0) {
        json walls = json::array();
        for (int w = 1; w <= 4; ++w) {
            // All elements of a wall share one true orientation by construction.
            for (const auto& e : s.irs) {
                if (e.wall_id == w) {
                    walls.push_back(vec_to_json(e.true_orientation.vec()));
                    break;
                }
            }
        }
        layout["true_wall_orientations"] = walls;
    }
    j["irs_layout"] = layout;
    j["receiver"] = json{{"orientation", vec_to_json(s.receiver_orientation.vec())},
                         {"pd_area", s.pd_area}};
    j["noise"] = json{{"variances", s.noise_variances}};
    j["search_region"] = box_to_json(s.search_region);
    j["room"] = box_to_json(s.room);
    j["los_blocked"] = s.los_blocked;
    return j;
}

} // namespace

std::string scene_to_json(const Scene& scene, int indent) {
    return scene_to_json_obj(scene).dump(indent);
}

Scene scene_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& err) {
        throw ConfigError(std::string("scene JSON parse error: ") + err.what());
    }
    Scene s;
    try {
        s.room = box_from_json(j.at("room"));
        s.search_region = box_from_json(j.at("search_region"));
        s.los_blocked = j.at("los_blocked").get<bool>();
        for (const auto& jl : j.at("leds")) {
            Led led{.position = vec_from_json(jl.at("position")),
                    .orientation = UnitVec3::normalized(vec_from_json(jl.at("orientation"))),
                    .lambertian_order = jl.at("lambertian_order").get<double>(),
                    .tx_power = jl.at("tx_power").get<double>()};
            s.leds.push_back(led);
        }
        const auto& jr = j.at("receiver");
        s.receiver_orientation = UnitVec3::normalized(vec_from_json(jr.at("orientation")));
        s.pd_area = jr.at("pd_area").get<double>();
        s.noise_variances = j.at("noise").at("variances").get<std::vector<double>>();
        const auto& jl = j.at("irs_layout");
        s.irs_layout = IrsLayout{.per_wall_count = jl.at("per_wall_count").get<int>(),
                                 .element_width = jl.at("element_width").get<double>(),
                                 .element_height = jl.at("element_height").get<double>(),
                                 .h_gap = jl.at("h_gap").get<double>(),
                                 .v_gap = jl.at("v_gap").get<double>(),
                                 .phong = PhongParams{
                                     .reflectance = jl.at("reflectance").get<double>(),
                                     .diffuse_fraction = jl.at("diffuse_fraction").get<double>(),
                                     .directivity = jl.at("directivity").get<double>()}};
        if (s.irs_layout.per_wall_count > 0) {
            s.irs = build_irs_array(s.irs_layout.per_wall_count, s.irs_layout.element_width,
                                    s.irs_layout.element_height, s.irs_layout.h_gap,
                                    s.irs_layout.v_gap, s.room, s.irs_layout.phong);
            if (jl.contains("true_wall_orientations")) {
                const auto& walls = jl.at("true_wall_orientations");
                if (walls.size() != 4) throw ConfigError("true_wall_orientations must list 4 walls");
                std::array<UnitVec3, 4> tw{UnitVec3{Vec3{0, 0, 1}}, UnitVec3{Vec3{0, 0, 1}},
                                           UnitVec3{Vec3{0, 0, 1}}, UnitVec3{Vec3{0, 0, 1}}};
                for (size_t w = 0; w < 4; ++w) tw[w] = UnitVec3::normalized(vec_from_json(walls[w]));
                set_true_orientations(s, tw);
            }
        }
    } catch (const json::exception& err) {
        throw ConfigError(std::string("scene JSON structure error: ") + err.what());
    }
    return s;
}

uint64_t scene_hash(const Scene& scene) {
    const std::string canonical = scene_to_json_obj(scene).dump();
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace irsvlp
