// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
//
// polykit - detection-geometry toolkit CLI.
//
// Subcommands: audit, anchors, extract, synth, eval, upsample-bench,
// loss-check.  Exit codes: 0 success, 1 usage error, 2 data error,
// 3 internal invariant violation.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "polykit/annotations.hpp"
#include "polykit/anchor_tools.hpp"
#include "polykit/detect_eval.hpp"
#include "polykit/hypercolumn.hpp"
#include "polykit/image_io.hpp"
#include "polykit/label_grid.hpp"
#include "polykit/loss_eval.hpp"
#include "polykit/mask_polygons.hpp"
#include "polykit/parallel.hpp"
#include "polykit/synth_gen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace polykit;

namespace {

std::pair<int, int> parse_size(const std::string& s) {
    const auto x = s.find_first_of("xX");
    if (x == std::string::npos) {
        throw CLI::ValidationError("size", "expected WxH, got '" + s + "'");
    }
    const int w = std::stoi(s.substr(0, x));
    const int h = std::stoi(s.substr(x + 1));
    if (w <= 0 || h <= 0) {
        throw CLI::ValidationError("size", "dimensions must be positive");
    }
    return {w, h};
}

double parse_scale(const std::string& s) {
    if (const auto slash = s.find('/'); slash != std::string::npos) {
        const double num = std::stod(s.substr(0, slash));
        const double den = std::stod(s.substr(slash + 1));
        if (den == 0.0) {
            throw CLI::ValidationError("scale", "zero denominator in '" + s + "'");
        }
        return num / den;
    }
    return std::stod(s);
}

std::vector<double> parse_scales(const std::string& csv) {
    std::vector<double> scales;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            scales.push_back(parse_scale(item));
        }
    }
    if (scales.empty()) {
        throw CLI::ValidationError("scales", "no scales given");
    }
    return scales;
}

std::vector<Anchor> read_anchor_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open anchors file: " + path.string());
    }
    std::vector<Anchor> anchors;
    double w = 0.0;
    double h = 0.0;
    while (in >> w >> h) {
        anchors.push_back({w, h});
    }
    if (anchors.empty()) {
        throw DataError("no anchors in " + path.string());
    }
    return anchors;
}

void write_anchor_file(const fs::path& path, std::span<const Anchor> anchors) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open for writing: " + path.string());
    }
    out.precision(17);
    for (const Anchor& a : anchors) {
        out << a.w << " " << a.h << "\n";
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open for writing: " + path.string());
    }
    out << text;
}

// Boxes of every record, rescaled from the record's native resolution to the
// audit resolution.
std::vector<std::vector<Box>> rescaled_scenes(std::span<const AnnotationRecord> records,
                                              int input_w, int input_h) {
    std::vector<std::vector<Box>> scenes(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const double fx = static_cast<double>(input_w) / records[i].width;
        const double fy = static_cast<double>(input_h) / records[i].height;
        for (const AnnotationObject& o : records[i].objects) {
            Box b = o.bbox;
            b.x1 *= fx;
            b.x2 *= fx;
            b.y1 *= fy;
            b.y2 *= fy;
            b.class_id = o.class_id;
            scenes[i].push_back(b);
        }
    }
    return scenes;
}

AnchorSet partition_anchors(std::vector<Anchor> anchors, std::span<const double> scales) {
    AnchorSet set;
    std::stable_sort(anchors.begin(), anchors.end(),
                     [](const Anchor& a, const Anchor& b) { return a.w * a.h < b.w * b.h; });
    set.anchors = std::move(anchors);
    if (scales.size() <= 1) {
        return set;
    }
    if (set.anchors.size() % scales.size() != 0) {
        throw DataError("anchor count must divide evenly across scales for --per-scale");
    }
    std::vector<int> order(scales.size());
    std::iota(order.begin(), order.end(), 0);
    // Finest grid (largest scale ratio) owns the smallest anchors.
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scales[static_cast<std::size_t>(a)] > scales[static_cast<std::size_t>(b)]; });
    const std::size_t per = set.anchors.size() / scales.size();
    set.scale_of_anchor.resize(set.anchors.size());
    for (std::size_t j = 0; j < set.anchors.size(); ++j) {
        set.scale_of_anchor[j] = order[j / per];
    }
    return set;
}

int run_audit(const std::string& annotations, const std::string& input_size,
              const std::string& scales_csv, const std::string& anchors_file, int k,
              std::uint64_t seed, bool per_scale, const std::string& csv_out,
              const std::string& json_out) {
    const auto [input_w, input_h] = parse_size(input_size);
    const std::vector<double> scales = parse_scales(scales_csv);
    if (per_scale && scales.size() < 2) {
        throw DataError("--per-scale needs at least two scales");
    }
    const auto records = read_annotations(annotations);
    const auto scenes = rescaled_scenes(records, input_w, input_h);

    std::vector<Anchor> anchors;
    if (!anchors_file.empty()) {
        anchors = read_anchor_file(anchors_file);
    } else {
        std::vector<SizeSample> sizes;
        for (const auto& boxes : scenes) {
            for (const Box& b : boxes) {
                sizes.push_back({b.width(), b.height()});
            }
        }
        if (sizes.empty()) {
            anchors.push_back({1.0, 1.0});  // degenerate but harmless: nothing to audit
        } else {
            anchors = kmeans_iou(sizes, k, seed).centroids;
        }
    }
    // One configuration per row: the YOLOv3-style partitioned audit is a
    // single configuration; without --per-scale every scale is audited as an
    // independent single-output head over all anchors.
    struct AuditRow {
        std::string label;
        std::vector<GridSpec> grids;
        AnchorSet anchors;
    };
    std::vector<AuditRow> rows;
    if (per_scale) {
        AuditRow row;
        std::ostringstream label;
        for (std::size_t i = 0; i < scales.size(); ++i) {
            label << (i ? ";" : "") << scales[i];
            row.grids.push_back({input_w, input_h, scales[i]});
        }
        row.label = label.str();
        row.anchors = partition_anchors(anchors, scales);
        rows.push_back(std::move(row));
    } else {
        for (const double s : scales) {
            AuditRow row;
            std::ostringstream label;
            label << s;
            row.label = label.str();
            row.grids.push_back({input_w, input_h, s});
            row.anchors.anchors = anchors;
            rows.push_back(std::move(row));
        }
    }

    std::ostringstream csv;
    csv << "input_w,input_h,scales,per_scale,anchors,total_labels,rewritten,colliding_pairs,rewrite_ratio\n";
    json jrows = json::array();
    for (const AuditRow& row : rows) {
        for (const GridSpec& g : row.grids) {
            g.validate();
        }
        std::vector<RewriteReport> reports(scenes.size());
        parallel_for(scenes.size(), [&](std::size_t i) {
            reports[i] = count_rewrites(scenes[i], row.grids, row.anchors);
        });
        std::size_t total = 0;
        std::size_t rewritten = 0;
        std::size_t pairs = 0;
        for (const RewriteReport& r : reports) {
            total += r.total_labels;
            rewritten += r.rewritten;
            pairs += r.colliding_pairs;
        }
        const double ratio =
            total == 0 ? 0.0 : static_cast<double>(rewritten) / static_cast<double>(total);
        csv << input_w << ',' << input_h << ',' << row.label << ',' << (per_scale ? 1 : 0) << ','
            << row.anchors.anchors.size() << ',' << total << ',' << rewritten << ',' << pairs << ','
            << ratio << '\n';
        jrows.push_back(json{{"input_w", input_w},
                             {"input_h", input_h},
                             {"scales", row.label},
                             {"per_scale", per_scale},
                             {"total_labels", total},
                             {"rewritten", rewritten},
                             {"colliding_pairs", pairs},
                             {"rewrite_ratio", ratio}});
        std::cout << "scales " << row.label << ": rewrite ratio " << 100.0 * ratio << " %\n";
    }
    if (!csv_out.empty()) {
        write_text(csv_out, csv.str());
    }
    if (!json_out.empty()) {
        write_text(json_out, jrows.dump(2) + "\n");
    }
    std::cout << csv.str();
    return 0;
}

int run_anchors(const std::string& annotations, int k, std::uint64_t seed,
                const std::string& out, const std::string& input_size) {
    const auto records = read_annotations(annotations);
    std::vector<SizeSample> sizes;
    if (!input_size.empty()) {
        const auto [w, h] = parse_size(input_size);
        for (const auto& boxes : rescaled_scenes(records, w, h)) {
            for (const Box& b : boxes) {
                sizes.push_back({b.width(), b.height()});
            }
        }
    } else {
        for (const AnnotationRecord& r : records) {
            for (const AnnotationObject& o : r.objects) {
                sizes.push_back({o.bbox.width(), o.bbox.height()});
            }
        }
    }
    const KMeansResult result = kmeans_iou(sizes, k, seed);
    write_anchor_file(out, result.centroids);
    std::cout << "samples: " << sizes.size() << "\nmean IoU: " << result.mean_iou
              << "\niterations: " << result.iterations << "\nanchors written to " << out << "\n";
    return 0;
}

int run_extract(const std::string& masks_dir, const std::string& out, int sectors, double eps) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(masks_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw DataError("no .pgm masks found in " + masks_dir);
    }
    std::vector<AnnotationRecord> records;
    for (const fs::path& file : files) {
        const GrayImage img = read_pgm(file);
        const auto blobs = blobs_from_levels(img.width, img.height, img.pixels);
        if (blobs.empty()) {
            std::cerr << "warning: " << file.filename().string() << " has no instances, skipped\n";
            continue;
        }
        AnnotationRecord record;
        record.image_id = file.stem().string();
        record.width = img.width;
        record.height = img.height;
        for (const PixelBlob& blob : blobs) {
            try {
                const ExtractResult r = extract_polygon(blob, sectors, eps);
                AnnotationObject o;
                o.class_id = 0;
                o.bbox = r.box;
                o.polygon = r.polygon;
                record.objects.push_back(std::move(o));
            } catch (const DataError& e) {
                std::cerr << "warning: " << file.filename().string() << ": " << e.what()
                          << ", blob skipped\n";
            }
        }
        records.push_back(std::move(record));
    }
    write_annotations(out, records);
    std::cout << "wrote " << records.size() << " records to " << out << "\n";
    return 0;
}

int run_synth(const std::string& out_dir, int width, int height, int count, std::uint64_t seed,
              const std::string& objects_range, const std::string& size_range,
              const std::string& primitives_csv, const std::string& background, int star_spikes) {
    SynthConfig config;
    config.width = width;
    config.height = height;
    config.count = count;
    config.seed = seed;
    config.star_spikes = star_spikes;
    if (!objects_range.empty()) {
        const auto colon = objects_range.find(':');
        config.min_objects = std::stoi(objects_range.substr(0, colon));
        config.max_objects = colon == std::string::npos ? config.min_objects
                                                        : std::stoi(objects_range.substr(colon + 1));
    }
    if (!size_range.empty()) {
        const auto colon = size_range.find(':');
        config.min_size = std::stod(size_range.substr(0, colon));
        config.max_size = colon == std::string::npos ? config.min_size
                                                     : std::stod(size_range.substr(colon + 1));
    }
    if (!primitives_csv.empty()) {
        config.primitives.clear();
        std::stringstream ss(primitives_csv);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item == "circle") config.primitives.push_back(Primitive::Circle);
            else if (item == "rectangle") config.primitives.push_back(Primitive::Rectangle);
            else if (item == "triangle") config.primitives.push_back(Primitive::Triangle);
            else if (item == "star") config.primitives.push_back(Primitive::Star);
            else if (item == "random-polygon") config.primitives.push_back(Primitive::RandomPolygon);
            else throw CLI::ValidationError("primitives", "unknown primitive '" + item + "'");
        }
    }
    if (background == "noise") {
        config.background = SynthConfig::Background::Noise;
    } else if (background != "flat") {
        throw CLI::ValidationError("background", "expected flat or noise");
    }

    const auto scenes = generate(config);
    const fs::path images_dir = fs::path(out_dir) / "images";
    fs::create_directories(images_dir);
    std::vector<AnnotationRecord> records;
    for (const SynthScene& s : scenes) {
        write_ppm(images_dir / (s.image_id + ".ppm"), s.image);
        AnnotationRecord r;
        r.image_id = s.image_id;
        r.width = config.width;
        r.height = config.height;
        for (const SynthObject& o : s.objects) {
            AnnotationObject a;
            a.class_id = o.class_id;
            a.bbox = o.box;
            a.polygon = o.polygon;
            r.objects.push_back(std::move(a));
        }
        records.push_back(std::move(r));
    }
    write_annotations(fs::path(out_dir) / "annotations.jsonl", records);
    std::cout << "wrote " << scenes.size() << " images to " << out_dir << "\n";
    return 0;
}

json triple_to_json(const ApTriple& t) {
    return json{{"ap", t.ap}, {"ap50", t.ap50}, {"ap75", t.ap75}};
}

int run_eval(const std::string& detections, const std::string& ground_truth,
             const std::string& mode, const std::string& json_out, const std::string& csv_out) {
    GroundTruth gt;
    for (const AnnotationRecord& r : read_annotations(ground_truth)) {
        GtImage img;
        img.width = r.width;
        img.height = r.height;
        for (const AnnotationObject& o : r.objects) {
            GtObject g;
            g.box = o.bbox;
            g.polygon = o.polygon;
            g.class_id = o.class_id;
            img.objects.push_back(std::move(g));
        }
        gt[r.image_id] = std::move(img);
    }
    std::vector<Detection> dets;
    for (const AnnotationRecord& r : read_annotations(detections)) {
        for (const AnnotationObject& o : r.objects) {
            if (!o.score) {
                throw DataError("detection record '" + r.image_id + "' has an object without score");
            }
            Detection d;
            d.image_id = r.image_id;
            d.box = o.bbox;
            d.polygon = o.polygon;
            d.score = *o.score;
            d.class_id = o.class_id;
            dets.push_back(std::move(d));
        }
    }

    json j;
    std::ostringstream csv;
    csv << "mode,class,ap,ap50,ap75\n";
    auto run_mode = [&](EvalMode m, const std::string& name) {
        const EvalResult r = evaluate(dets, gt, m);
        j[name]["mean"] = triple_to_json(r.mean);
        for (const auto& [cls, ce] : r.per_class) {
            j[name]["per_class"][std::to_string(cls)] = triple_to_json(ce.summary);
            csv << name << ',' << cls << ',' << ce.summary.ap << ',' << ce.summary.ap50 << ','
                << ce.summary.ap75 << '\n';
        }
        csv << name << ",mean," << r.mean.ap << ',' << r.mean.ap50 << ',' << r.mean.ap75 << '\n';
        std::cout << name << " AP " << r.mean.ap << "  AP50 " << r.mean.ap50 << "  AP75 "
                  << r.mean.ap75 << "\n";
    };
    if (mode == "box" || mode == "both") {
        run_mode(EvalMode::Box, "box");
    }
    if (mode == "mask" || mode == "both") {
        run_mode(EvalMode::Mask, "mask");
    }
    if (mode != "box" && mode != "mask" && mode != "both") {
        throw CLI::ValidationError("mode", "expected box, mask or both");
    }
    if (!json_out.empty()) {
        write_text(json_out, j.dump(2) + "\n");
    }
    if (!csv_out.empty()) {
        write_text(csv_out, csv.str());
    }
    return 0;
}

int run_upsample_bench(int max_levels, const std::string& base, int channels, std::uint64_t seed,
                       const std::string& csv_out) {
    const auto [bw, bh] = parse_size(base);
    std::mt19937_64 rng(seed);
    auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 4.0 - 2.0; };
    std::ostringstream csv;
    csv << "levels,channels,base_h,base_w,mode,max_abs_diff,additions_direct,additions_stairstep\n";
    for (int n = 2; n <= max_levels; ++n) {
        if (bh % (1 << (n - 1)) != 0 || bw % (1 << (n - 1)) != 0) {
            throw DataError("base size must be divisible by 2^(levels-1)");
        }
        std::vector<FeatureMap> levels;
        for (int i = 0; i < n; ++i) {
            FeatureMap f(bh >> i, bw >> i, channels);
            for (double& v : f.data) {
                v = u();
            }
            levels.push_back(std::move(f));
        }
        for (const Interp mode : {Interp::Nearest, Interp::Bilinear}) {
            const HypercolumnSpec spec{n, channels, mode};
            const FeatureMap direct = hypercolumn_direct(levels, spec);
            const FeatureMap stair = hypercolumn_stairstep(levels, spec);
            double max_abs = 0.0;
            for (std::size_t i = 0; i < direct.data.size(); ++i) {
                max_abs = std::max(max_abs, std::abs(direct.data[i] - stair.data[i]));
            }
            csv << n << ',' << channels << ',' << bh << ',' << bw << ','
                << (mode == Interp::Nearest ? "nearest" : "bilinear") << ',' << max_abs << ','
                << count_added_elements(spec, bh, bw, AggregationScheme::Direct) << ','
                << count_added_elements(spec, bh, bw, AggregationScheme::Stairstep) << '\n';
        }
    }
    if (!csv_out.empty()) {
        write_text(csv_out, csv.str());
    }
    std::cout << csv.str();
    return 0;
}

int run_loss_check(int trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto u = [&](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    const GridSpec grid{16, 16, 1.0 / 8};
    AnchorSet anchors;
    anchors.anchors = {{6, 5}, {11, 12}};
    const PolarGridSpec polar{3};
    double worst = 0.0;
    double worst_abs = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        std::vector<LabeledObject> labels;
        const int n = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < n; ++i) {
            const double w = u(3, 10);
            const double h = u(3, 10);
            const double cx = u(1, 15);
            const double cy = u(1, 15);
            labels.push_back({{cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2,
                               static_cast<int>(rng() % 2)},
                              std::nullopt});
        }
        const TargetTensor target = build_targets(labels, grid, anchors, polar, 2).targets;
        RawPrediction pred(target.grid_h, target.grid_w, target.layout);
        for (double& v : pred.data) {
            v = u(-3, 3);
        }
        std::vector<Box> boxes;
        for (const LabeledObject& l : labels) {
            boxes.push_back(l.box);
        }
        const auto mask = compute_ignore_mask(pred, target, grid, anchors, boxes);
        const RawPrediction grad = loss_gradient(pred, target, grid, anchors, mask);
        const double h = 1e-5;
        for (std::size_t i = 0; i < pred.data.size(); ++i) {
            RawPrediction probe = pred;
            probe.data[i] = pred.data[i] + h;
            const double up = loss_total(probe, target, grid, anchors, mask).total;
            probe.data[i] = pred.data[i] - h;
            const double dn = loss_total(probe, target, grid, anchors, mask).total;
            const double fd = (up - dn) / (2.0 * h);
            const double an = grad.data[i];
            if (std::abs(an) < 1e-8) {
                worst_abs = std::max(worst_abs, std::abs(fd - an));
            } else {
                worst = std::max(worst, std::abs(fd - an) / std::abs(an));
            }
        }
    }
    const bool pass = worst < 1e-4 && worst_abs < 1e-7;
    std::cout << "max rel err = " << worst << ", max abs err on near-zero entries = " << worst_abs
              << (pass ? "  (PASS: < 1e-4 / < 1e-7)\n" : "  (FAIL)\n");
    return pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"polykit - detection-geometry toolkit"};
    app.require_subcommand(1);

    // audit
    auto* audit = app.add_subcommand("audit", "Label-rewrite audit over an annotation set");
    std::string audit_annotations;
    std::string audit_input_size = "416x416";
    std::string audit_scales = "1/4";
    std::string audit_anchors;
    int audit_k = 9;
    std::uint64_t audit_seed = 0;
    bool audit_per_scale = false;
    std::string audit_csv;
    std::string audit_json;
    audit->add_option("--annotations", audit_annotations, "JSON-lines annotations")->required();
    audit->add_option("--input-size", audit_input_size, "audit resolution WxH (default 416x416)");
    audit->add_option("--scales", audit_scales, "comma list of scale ratios, e.g. 1/8,1/16,1/32");
    audit->add_option("--anchors", audit_anchors, "anchors file ('w h' per line); overrides --k");
    audit->add_option("--k", audit_k, "number of anchors to estimate with k-means (default 9)");
    audit->add_option("--seed", audit_seed, "k-means seed (default 0)");
    audit->add_flag("--per-scale", audit_per_scale,
                    "partition anchors across the scales, YOLOv3 style");
    audit->add_option("--csv", audit_csv,
                      "write the report as CSV (columns: input_w,input_h,scales,per_scale,"
                      "anchors,total_labels,rewritten,colliding_pairs,rewrite_ratio)");
    audit->add_option("--json", audit_json, "write the report as JSON");

    // anchors
    auto* anchors_cmd = app.add_subcommand("anchors", "Estimate anchors with IoU k-means");
    std::string anchors_annotations;
    int anchors_k = 9;
    std::uint64_t anchors_seed = 0;
    std::string anchors_out = "anchors.txt";
    std::string anchors_input_size;
    anchors_cmd->add_option("--annotations", anchors_annotations, "JSON-lines annotations")->required();
    anchors_cmd->add_option("-k,--k", anchors_k, "cluster count (default 9)");
    anchors_cmd->add_option("--seed", anchors_seed, "seed (default 0)");
    anchors_cmd->add_option("-o,--out", anchors_out, "output anchors file");
    anchors_cmd->add_option("--input-size", anchors_input_size,
                            "rescale annotations to WxH before clustering");

    // extract
    auto* extract = app.add_subcommand("extract", "Extract bounding polygons from PGM instance masks");
    std::string extract_masks;
    std::string extract_out = "annotations.jsonl";
    int extract_sectors = 72;
    double extract_eps = 0.5;
    extract->add_option("--masks", extract_masks, "directory of P5 .pgm masks (0 = background)")
        ->required();
    extract->add_option("--out", extract_out, "output JSON-lines path");
    extract->add_option("--sectors", extract_sectors, "angular bins for boundary sampling (default 72)");
    extract->add_option("--eps", extract_eps, "collinearity tolerance in px (default 0.5)");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate synthetic scenes with annotations");
    std::string synth_out;
    int synth_width = 640;
    int synth_height = 480;
    int synth_count = 10;
    std::uint64_t synth_seed = 0;
    std::string synth_objects = "1:5";
    std::string synth_size = "10:40";
    std::string synth_primitives;
    std::string synth_background = "flat";
    int synth_spikes = 5;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--width", synth_width, "image width (default 640)");
    synth->add_option("--height", synth_height, "image height (default 480)");
    synth->add_option("--count", synth_count, "number of images (default 10)");
    synth->add_option("--seed", synth_seed, "seed (default 0)");
    synth->add_option("--objects", synth_objects, "objects per image, lo:hi (default 1:5)");
    synth->add_option("--size", synth_size, "object size range in px, lo:hi (default 10:40)");
    synth->add_option("--primitives", synth_primitives,
                      "comma list of circle,rectangle,triangle,star,random-polygon (default all)");
    synth->add_option("--background", synth_background, "flat or noise (default flat)");
    synth->add_option("--star-spikes", synth_spikes, "spike count for stars, >= 5 (default 5)");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "COCO-style AP evaluation");
    std::string eval_dets;
    std::string eval_gt;
    std::string eval_mode = "box";
    std::string eval_json;
    std::string eval_csv;
    eval_cmd->add_option("--detections", eval_dets, "JSON-lines detections (objects carry score)")
        ->required();
    eval_cmd->add_option("--ground-truth", eval_gt, "JSON-lines ground truth")->required();
    eval_cmd->add_option("--mode", eval_mode, "box, mask or both (default box)");
    eval_cmd->add_option("--json", eval_json, "write results as JSON");
    eval_cmd->add_option("--csv", eval_csv,
                         "write results as CSV (columns: mode,class,ap,ap50,ap75)");

    // upsample-bench
    auto* bench = app.add_subcommand("upsample-bench",
                                     "Direct vs stairstep aggregation differences and addition counts");
    int bench_levels = 4;
    std::string bench_base = "32x32";
    int bench_channels = 8;
    std::uint64_t bench_seed = 0;
    std::string bench_csv;
    bench->add_option("--levels", bench_levels, "maximum pyramid depth (default 4)");
    bench->add_option("--base", bench_base, "level-1 size HxW (default 32x32)");
    bench->add_option("--channels", bench_channels, "aligned channel count (default 8)");
    bench->add_option("--seed", bench_seed, "seed (default 0)");
    bench->add_option("--csv", bench_csv,
                      "write the table as CSV (columns: levels,channels,base_h,base_w,mode,"
                      "max_abs_diff,additions_direct,additions_stairstep)");

    // loss-check
    auto* loss_check = app.add_subcommand("loss-check",
                                          "Verify analytic loss gradients against finite differences");
    int loss_trials = 50;
    std::uint64_t loss_seed = 0;
    loss_check->add_option("--trials", loss_trials, "number of random instances (default 50)");
    loss_check->add_option("--seed", loss_seed, "seed (default 0)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (audit->parsed()) {
            return run_audit(audit_annotations, audit_input_size, audit_scales, audit_anchors,
                             audit_k, audit_seed, audit_per_scale, audit_csv, audit_json);
        }
        if (anchors_cmd->parsed()) {
            return run_anchors(anchors_annotations, anchors_k, anchors_seed, anchors_out,
                               anchors_input_size);
        }
        if (extract->parsed()) {
            return run_extract(extract_masks, extract_out, extract_sectors, extract_eps);
        }
        if (synth->parsed()) {
            return run_synth(synth_out, synth_width, synth_height, synth_count, synth_seed,
                             synth_objects, synth_size, synth_primitives, synth_background,
                             synth_spikes);
        }
        if (eval_cmd->parsed()) {
            return run_eval(eval_dets, eval_gt, eval_mode, eval_json, eval_csv);
        }
        if (bench->parsed()) {
            return run_upsample_bench(bench_levels, bench_base, bench_channels, bench_seed,
                                      bench_csv);
        }
        if (loss_check->parsed()) {
            return run_loss_check(loss_trials, loss_seed);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
