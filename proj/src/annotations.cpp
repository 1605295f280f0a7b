// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#include "polykit/annotations.hpp"

#include <fstream>

#include "json.hpp"

namespace polykit {

using nlohmann::json;

void validate_record(const AnnotationRecord& record) {
    if (record.image_id.empty()) {
        throw DataError("annotation record without image_id");
    }
    if (record.width <= 0 || record.height <= 0) {
        throw DataError("record '" + record.image_id + "': non-positive image dimensions");
    }
    for (const AnnotationObject& o : record.objects) {
        if (o.class_id < 0) {
            throw DataError("record '" + record.image_id + "': negative class_id");
        }
        if (!o.bbox.valid() || o.bbox.x2 < o.bbox.x1 || o.bbox.y2 < o.bbox.y1) {
            throw DataError("record '" + record.image_id + "': invalid bbox");
        }
        if (o.polygon && o.polygon->vertices.size() < 3) {
            throw DataError("record '" + record.image_id + "': polygon with fewer than 3 vertices");
        }
        if (o.score && (*o.score < 0.0 || *o.score > 1.0)) {
            throw DataError("record '" + record.image_id + "': score outside [0, 1]");
        }
    }
}

std::string record_to_json(const AnnotationRecord& record) {
    json objects = json::array();
    for (const AnnotationObject& o : record.objects) {
        json jo{{"class_id", o.class_id},
                {"bbox", {o.bbox.x1, o.bbox.y1, o.bbox.x2, o.bbox.y2}}};
        if (o.polygon) {
            json pts = json::array();
            for (const Point& v : o.polygon->vertices) {
                pts.push_back({v.x, v.y});
            }
            jo["polygon"] = std::move(pts);
        }
        if (o.score) {
            jo["score"] = *o.score;
        }
        objects.push_back(std::move(jo));
    }
    const json j{{"image_id", record.image_id},
                 {"width", record.width},
                 {"height", record.height},
                 {"objects", std::move(objects)}};
    return j.dump();
}

AnnotationRecord record_from_json(const std::string& line) {
    const json j = json::parse(line);
    AnnotationRecord r;
    r.image_id = j.at("image_id").get<std::string>();
    r.width = j.at("width").get<int>();
    r.height = j.at("height").get<int>();
    for (const json& jo : j.at("objects")) {
        AnnotationObject o;
        o.class_id = jo.at("class_id").get<int>();
        const json& bb = jo.at("bbox");
        if (!bb.is_array() || bb.size() != 4) {
            throw DataError("bbox must be [x1,y1,x2,y2]");
        }
        o.bbox.x1 = bb[0].get<double>();
        o.bbox.y1 = bb[1].get<double>();
        o.bbox.x2 = bb[2].get<double>();
        o.bbox.y2 = bb[3].get<double>();
        o.bbox.class_id = o.class_id;
        if (jo.contains("polygon")) {
            Polygon p;
            for (const json& pt : jo.at("polygon")) {
                if (!pt.is_array() || pt.size() != 2) {
                    throw DataError("polygon vertices must be [x,y]");
                }
                p.vertices.push_back({pt[0].get<double>(), pt[1].get<double>()});
            }
            o.polygon = std::move(p);
        }
        if (jo.contains("score")) {
            o.score = jo.at("score").get<double>();
            o.bbox.score = o.score;
        }
        r.objects.push_back(std::move(o));
    }
    return r;
}

std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open annotations: " + path.string());
    }
    std::vector<AnnotationRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            AnnotationRecord r = record_from_json(line);
            validate_record(r);
            records.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

void write_annotations(const std::filesystem::path& path,
                       std::span<const AnnotationRecord> records) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open for writing: " + path.string());
    }
    for (const AnnotationRecord& r : records) {
        validate_record(r);
        out << record_to_json(r) << '\n';
    }
    if (!out) {
        throw DataError("write failed: " + path.string());
    }
}

}  // namespace polykit
