// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polykit/geometry.hpp"

namespace polykit {

/// One annotated or detected object inside a record.  `score` is present for
/// detections and absent for ground truth.
struct AnnotationObject {
    int class_id = 0;
    Box bbox;
    std::optional<Polygon> polygon;
    std::optional<double> score;
};

/// One image per JSON line:
///   {"image_id": "...", "width": W, "height": H,
///    "objects": [{"class_id": c, "bbox": [x1,y1,x2,y2],
///                 "polygon": [[x,y],...], "score": s}, ...]}
/// polygon and score are optional per object.
struct AnnotationRecord {
    std::string image_id;
    int width = 0;
    int height = 0;
    std::vector<AnnotationObject> objects;
};

/// Schema validation shared by reader and writer; throws DataError with the
/// offending record named.
void validate_record(const AnnotationRecord& record);

/// Reads JSON-lines annotations.  Parse and schema errors carry the 1-based
/// line number.  Blank lines are skipped.
std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path);

/// Writes JSON-lines annotations, validating every record first.  Numbers are
/// serialized so a re-read reproduces them exactly.
void write_annotations(const std::filesystem::path& path,
                       std::span<const AnnotationRecord> records);

std::string record_to_json(const AnnotationRecord& record);
AnnotationRecord record_from_json(const std::string& line);

}  // namespace polykit
