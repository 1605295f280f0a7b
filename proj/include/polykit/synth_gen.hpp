// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polykit/geometry.hpp"
#include "polykit/image_io.hpp"

namespace polykit {

/// Geometric primitive kinds; the underlying value doubles as the class id in
/// emitted annotations.
enum class Primitive : int { Circle = 0, Rectangle = 1, Triangle = 2, Star = 3, RandomPolygon = 4 };

struct SynthConfig {
    int width = 640;
    int height = 480;
    int min_objects = 1;
    int max_objects = 5;
    std::vector<Primitive> primitives{Primitive::Circle, Primitive::Rectangle, Primitive::Triangle,
                                      Primitive::Star, Primitive::RandomPolygon};
    double min_size = 10.0;  // object diameter range, pixels
    double max_size = 40.0;
    enum class Background { Flat, Noise } background = Background::Flat;
    std::uint64_t seed = 0;
    int count = 1;
    int star_spikes = 5;
};

struct SynthObject {
    Box box;          // tight bounds of the polygon
    Polygon polygon;  // ground-truth vertices of the primitive
    int class_id = 0;
};

struct SynthScene {
    std::string image_id;  // zero-padded sequence number
    RgbImage image;
    std::vector<SynthObject> objects;
};

/// Seeded deterministic scene generation.  Every object's polygon is
/// star-shaped about its center (stars included), placement keeps shapes
/// fully inside the image, overlaps are allowed and later objects paint over
/// earlier ones.  Per-image sub-seeds derive from config.seed, so scenes are
/// reproducible individually.  Infeasible configurations raise DataError.
std::vector<SynthScene> generate(const SynthConfig& config);

}  // namespace polykit
