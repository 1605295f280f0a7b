// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#include "polykit/synth_gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>

#include "polykit/parallel.hpp"

namespace polykit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

Polygon radial_polygon(Point center, std::span<const double> angles, std::span<const double> radii) {
    Polygon p;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        p.vertices.push_back(
            {center.x + radii[i] * std::cos(angles[i]), center.y + radii[i] * std::sin(angles[i])});
    }
    return p;
}

Polygon make_primitive(Primitive kind, Point center, double radius, int star_spikes,
                       std::mt19937_64& rng) {
    switch (kind) {
        case Primitive::Circle: {
            const int n = 32;
            const double phase = uniform(rng, 0.0, kTwoPi);
            std::vector<double> angles(n), radii(n, radius);
            for (int i = 0; i < n; ++i) {
                angles[static_cast<std::size_t>(i)] = std::fmod(phase + i * kTwoPi / n, kTwoPi);
            }
            return radial_polygon(center, angles, radii);
        }
        case Primitive::Rectangle: {
            const double hx = radius * uniform(rng, 0.5, 1.0);
            const double hy = radius * uniform(rng, 0.5, 1.0);
            return {{{center.x - hx, center.y - hy},
                     {center.x + hx, center.y - hy},
                     {center.x + hx, center.y + hy},
                     {center.x - hx, center.y + hy}}};
        }
        case Primitive::Triangle: {
            std::vector<double> angles(3), radii(3);
            // Spread the vertices one per third of the circle; keeps triangles
            // from collapsing to slivers.
            for (int i = 0; i < 3; ++i) {
                angles[static_cast<std::size_t>(i)] = (i + uniform(rng, 0.1, 0.9)) * kTwoPi / 3.0;
                radii[static_cast<std::size_t>(i)] = radius * uniform(rng, 0.6, 1.0);
            }
            return radial_polygon(center, angles, radii);
        }
        case Primitive::Star: {
            const int n = 2 * star_spikes;
            const double phase = uniform(rng, 0.0, kTwoPi);
            const double inner = radius * uniform(rng, 0.35, 0.5);
            std::vector<double> angles(static_cast<std::size_t>(n)), radii(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                angles[static_cast<std::size_t>(i)] = std::fmod(phase + i * kTwoPi / n, kTwoPi);
                radii[static_cast<std::size_t>(i)] = (i % 2 == 0) ? radius : inner;
            }
            return radial_polygon(center, angles, radii);
        }
        case Primitive::RandomPolygon: {
            const int n = 5 + static_cast<int>(rng() % 8);
            std::vector<double> angles(static_cast<std::size_t>(n)), radii(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                angles[static_cast<std::size_t>(i)] = uniform(rng, 0.0, kTwoPi);
                radii[static_cast<std::size_t>(i)] = radius * uniform(rng, 0.4, 1.0);
            }
            std::sort(angles.begin(), angles.end());
            return radial_polygon(center, angles, radii);
        }
    }
    throw std::invalid_argument("make_primitive: unknown primitive");
}

void check_config(const SynthConfig& c) {
    if (c.width <= 0 || c.height <= 0 || c.count < 0) {
        throw DataError("synth: non-positive image dimensions or count");
    }
    if (c.min_objects < 0 || c.max_objects < c.min_objects) {
        throw DataError("synth: empty object-count range");
    }
    if (c.primitives.empty()) {
        throw DataError("synth: empty primitive set");
    }
    if (!(c.min_size > 0.0) || c.max_size < c.min_size) {
        throw DataError("synth: empty size range");
    }
    if (c.max_size > std::min(c.width, c.height)) {
        throw DataError("synth: objects larger than the image");
    }
    if (c.star_spikes < 5) {
        throw DataError("synth: star_spikes must be >= 5");
    }
}

SynthScene make_scene(const SynthConfig& c, int index) {
    std::mt19937_64 rng(splitmix64(c.seed + static_cast<std::uint64_t>(index)));
    SynthScene scene;
    char name[16];
    std::snprintf(name, sizeof(name), "%06d", index);
    scene.image_id = name;
    scene.image = RgbImage(c.width, c.height);

    if (c.background == SynthConfig::Background::Noise) {
        for (int y = 0; y < c.height; ++y) {
            for (int x = 0; x < c.width; ++x) {
                const auto g = static_cast<std::uint8_t>(rng() % 64);
                scene.image.set(x, y, g, g, g);
            }
        }
    } else {
        for (int y = 0; y < c.height; ++y) {
            for (int x = 0; x < c.width; ++x) {
                scene.image.set(x, y, 24, 24, 24);
            }
        }
    }

    static constexpr std::uint8_t kPalette[5][3] = {
        {200, 80, 80}, {80, 200, 80}, {80, 80, 200}, {200, 200, 80}, {200, 80, 200}};

    const int n_objects = c.min_objects +
        static_cast<int>(rng() % static_cast<std::uint64_t>(c.max_objects - c.min_objects + 1));
    for (int i = 0; i < n_objects; ++i) {
        const Primitive kind = c.primitives[rng() % c.primitives.size()];
        const double size = uniform(rng, c.min_size, c.max_size);
        const double radius = 0.5 * size;
        const Point center{uniform(rng, radius, c.width - radius),
                           uniform(rng, radius, c.height - radius)};
        SynthObject obj;
        obj.class_id = static_cast<int>(kind);
        obj.polygon = make_primitive(kind, center, radius, c.star_spikes, rng);
        obj.box = polygon_bounds(obj.polygon);
        obj.box.class_id = obj.class_id;

        const Mask m = rasterize_polygon(obj.polygon, c.width, c.height);
        const std::uint8_t* color = kPalette[obj.class_id % 5];
        for (int y = 0; y < c.height; ++y) {
            for (int x = 0; x < c.width; ++x) {
                if (m.at(x, y)) {
                    scene.image.set(x, y, color[0], color[1], color[2]);
                }
            }
        }
        scene.objects.push_back(std::move(obj));
    }
    return scene;
}

}  // namespace

std::vector<SynthScene> generate(const SynthConfig& config) {
    check_config(config);
    std::vector<SynthScene> scenes(static_cast<std::size_t>(config.count));
    parallel_for(static_cast<std::size_t>(config.count), [&](std::size_t i) {
        scenes[i] = make_scene(config, static_cast<int>(i));
    });
    return scenes;
}

}  // namespace polykit
