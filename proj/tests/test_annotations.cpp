// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#include "polykit/annotations.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"

using namespace polykit;

namespace {

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("annotation records roundtrip losslessly through JSON lines") {
    std::vector<AnnotationRecord> records;
    AnnotationRecord r;
    r.image_id = "000007";
    r.width = 800;
    r.height = 600;
    AnnotationObject o;
    o.class_id = 3;
    o.bbox = {1.0 / 3.0, 0.1, 123.456789012345, 599.999999
    };
    o.bbox.class_id = 3;
    o.polygon = Polygon{{{10.5, 20.25}, {30.0, 20.0}, {25.0, 40.0}}};
    o.score = 0.875;
    r.objects.push_back(o);
    AnnotationObject bare;
    bare.class_id = 0;
    bare.bbox = {0, 0, 10, 10};
    r.objects.push_back(bare);
    records.push_back(r);

    const auto path = temp_file("polykit_roundtrip.jsonl");
    write_annotations(path, records);
    const auto back = read_annotations(path);
    REQUIRE(back.size() == 1);
    CHECK(back[0].image_id == "000007");
    CHECK(back[0].width == 800);
    REQUIRE(back[0].objects.size() == 2);
    CHECK(back[0].objects[0].bbox.x1 == records[0].objects[0].bbox.x1);
    CHECK(back[0].objects[0].bbox.x2 == records[0].objects[0].bbox.x2);
    CHECK(back[0].objects[0].score == records[0].objects[0].score);
    REQUIRE(back[0].objects[0].polygon.has_value());
    CHECK(back[0].objects[0].polygon->vertices[1].x == 30.0);
    CHECK(!back[0].objects[1].polygon.has_value());
    CHECK(!back[0].objects[1].score.has_value());
    std::filesystem::remove(path);
}

TEST_CASE("parse errors carry the line number") {
    const auto path = temp_file("polykit_badline.jsonl");
    {
        std::ofstream out(path);
        out << R"({"image_id":"a","width":4,"height":4,"objects":[]})" << "\n";
        out << "{not json}\n";
    }
    try {
        read_annotations(path);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("schema violations are rejected on write and read") {
    AnnotationRecord bad;
    bad.image_id = "x";
    bad.width = 4;
    bad.height = 4;
    AnnotationObject o;
    o.bbox = {10, 10, 4, 4};  // inverted corners
    bad.objects.push_back(o);
    const auto path = temp_file("polykit_badrec.jsonl");
    CHECK_THROWS_AS(write_annotations(path, std::vector<AnnotationRecord>{bad}), DataError);

    {
        std::ofstream out(path);
        out << R"({"image_id":"a","width":4,"height":4,"objects":[{"class_id":0,"bbox":[0,0,2,2],"polygon":[[0,0],[1,1]]}]})"
            << "\n";
    }
    CHECK_THROWS_AS(read_annotations(path), DataError);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(read_annotations(temp_file("polykit_missing.jsonl")), DataError);
}

TEST_CASE("blank lines are skipped") {
    const auto path = temp_file("polykit_blank.jsonl");
    {
        std::ofstream out(path);
        out << "\n";
        out << R"({"image_id":"a","width":4,"height":4,"objects":[]})" << "\n";
        out << "   \n";
    }
    CHECK(read_annotations(path).size() == 1);
    std::filesystem::remove(path);
}
