#include "dynbo/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "dynbo/errors.hpp"

namespace dynbo {

namespace fs = std::filesystem;

double iou(const BoundingBox& a, const BoundingBox& b) {
  if (!(a.width > 0.0 && a.height > 0.0 && b.width > 0.0 && b.height > 0.0))
    throw InvalidArgument("iou requires boxes with positive area");
  const double iw = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.left(), b.left()));
  const double ih = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top()));
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

Frame Sequence::frame(std::size_t i) const {
  if (i >= size()) throw InvalidArgument("frame index out of range");
  Frame f;
  f.index = static_cast<int>(i);
  if (i < frame_paths.size()) f.path = frame_paths[i];
  f.image = i < images.size() ? images[i] : load_image(frame_paths.at(i));
  return f;
}

BoundingBox parse_groundtruth_line(const std::string& line, std::size_t line_number) {
  std::string cleaned = line;
  std::replace_if(cleaned.begin(), cleaned.end(), [](char c) { return c == ',' || c == '\t' || c == ';'; }, ' ');
  std::istringstream in(cleaned);
  std::vector<double> v;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      const double x = std::stod(tok, &used);
      if (used != tok.size() || !std::isfinite(x)) throw std::invalid_argument(tok);
      v.push_back(x);
    } catch (const std::exception&) {
      throw ParseError("unparsable ground-truth value '" + tok + "'", line_number);
    }
  }
  if (v.size() == 4) {
    if (!(v[2] > 0.0 && v[3] > 0.0)) throw ParseError("ground-truth box must have positive size", line_number);
    return BoundingBox::from_top_left(v[0], v[1], v[2], v[3]);
  }
  if (v.size() == 8) {
    double x0 = v[0], x1 = v[0], y0 = v[1], y1 = v[1];
    for (std::size_t i = 0; i < 8; i += 2) {
      x0 = std::min(x0, v[i]);
      x1 = std::max(x1, v[i]);
      y0 = std::min(y0, v[i + 1]);
      y1 = std::max(y1, v[i + 1]);
    }
    if (!(x1 > x0 && y1 > y0)) throw ParseError("ground-truth polygon has zero area", line_number);
    return BoundingBox::from_top_left(x0, y0, x1 - x0, y1 - y0);
  }
  throw ParseError("expected 4 or 8 numbers, found " + std::to_string(v.size()), line_number);
}

Sequence load_sequence(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw DatasetError("sequence directory '" + dir + "' does not exist");
  const fs::path gt_path = root / "groundtruth.txt";
  if (!fs::exists(gt_path)) throw DatasetError("missing groundtruth.txt in '" + dir + "'");

  Sequence seq;
  seq.name = root.filename().string();
  if (seq.name.empty()) seq.name = root.parent_path().filename().string();

  static const std::set<std::string> image_ext{".jpg", ".jpeg", ".png", ".bmp", ".pgm", ".ppm", ".pnm"};
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (image_ext.count(ext)) seq.frame_paths.push_back(entry.path().string());
  }
  std::sort(seq.frame_paths.begin(), seq.frame_paths.end());

  std::ifstream in(gt_path);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    seq.ground_truth.push_back(parse_groundtruth_line(line, number));
  }
  if (seq.ground_truth.size() != seq.frame_paths.size())
    throw DatasetError("sequence '" + seq.name + "' has " + std::to_string(seq.frame_paths.size()) + " frames but " +
                       std::to_string(seq.ground_truth.size()) + " ground-truth entries");
  if (seq.size() < 2) throw DatasetError("sequence '" + seq.name + "' needs at least 2 frames");
  return seq;
}

SdbtaEvalTracker::SdbtaEvalTracker(std::unique_ptr<SimilarityOracle> oracle, SdbtaConfig cfg)
    : oracle_(std::move(oracle)), tracker_(*oracle_, std::move(cfg)) {}

void SdbtaEvalTracker::init(const Frame& first, const BoundingBox& box) { tracker_.init(first, box); }

BoundingBox SdbtaEvalTracker::step(const Frame& frame) { return tracker_.step(frame); }

std::map<std::string, std::string> SdbtaEvalTracker::config_snapshot() const {
  const auto& c = tracker_.config();
  auto num = [](double v) {
    std::ostringstream s;
    s << v;
    return s.str();
  };
  return {{"tracker.budget", std::to_string(c.tracker.budget_per_frame)},
          {"tracker.grid_d", std::to_string(c.tracker.grid_d)},
          {"tracker.scale_p", num(c.tracker.scale_p)},
          {"tracker.search_factor", num(c.tracker.search_factor)},
          {"tracker.window_frames", std::to_string(c.tracker.window_frames)},
          {"tracker.scale_damping", num(c.tracker.scale_damping)},
          {"kernel.spatial.family", std::string(to_string(c.gp.kernel.spatial.family))},
          {"kernel.spatial.lengthscale", num(c.gp.kernel.spatial.lengthscale)},
          {"kernel.temporal.family", std::string(to_string(c.gp.kernel.temporal.family))},
          {"kernel.temporal.lengthscale", num(c.gp.kernel.temporal.lengthscale)},
          {"gp.noise", num(c.gp.noise)},
          {"acq.kind", std::string(to_string(c.acq.kind))},
          {"acq.alpha", num(c.acq.alpha)},
          {"acq.q", num(c.acq.q)},
          {"acq.fixed_xi", num(c.acq.fixed_xi)},
          {"seed", std::to_string(c.seed)}};
}

TemplateMatchTracker::TemplateMatchTracker(int stride, double search_factor)
    : stride_(stride), search_factor_(search_factor) {
  if (stride < 1) throw InvalidArgument("template matching stride must be >= 1");
  if (!(search_factor > 0.0)) throw InvalidArgument("search factor must be positive");
}

void TemplateMatchTracker::init(const Frame& first, const BoundingBox& box) {
  oracle_.set_exemplar(first, box);
  box_ = box;
}

BoundingBox TemplateMatchTracker::step(const Frame& frame) {
  const double half = search_factor_ * std::max(box_.width, box_.height);
  const int reach = static_cast<int>(std::floor(half / stride_));
  double best = -std::numeric_limits<double>::infinity();
  double best_dist = 0.0;
  BoundingBox winner = box_;
  for (int j = -reach; j <= reach; ++j) {
    for (int i = -reach; i <= reach; ++i) {
      const double cx = box_.cx + i * stride_;
      const double cy = box_.cy + j * stride_;
      if (cx < 0.0 || cy < 0.0 || cx > frame.image.width || cy > frame.image.height) continue;
      const double s = oracle_.score(frame, box_.moved_to(cx, cy), 1.0);
      const double dist = std::hypot(i * stride_, j * stride_);
      if (s > best || (s == best && dist < best_dist)) {
        best = s;
        best_dist = dist;
        winner = box_.moved_to(cx, cy);
      }
    }
  }
  box_ = winner;
  return box_;
}

std::map<std::string, std::string> TemplateMatchTracker::config_snapshot() const {
  std::ostringstream sf;
  sf << search_factor_;
  return {{"tm.stride", std::to_string(stride_)}, {"tm.search_factor", sf.str()}};
}

void EvalReport::recompute_summary() {
  if (trace.empty()) {
    mean_iou = std_iou = 0.0;
    return;
  }
  double sum = 0.0;
  for (double v : trace) sum += v;
  mean_iou = sum / static_cast<double>(trace.size());
  double sq = 0.0;
  for (double v : trace) sq += (v - mean_iou) * (v - mean_iou);
  std_iou = std::sqrt(sq / static_cast<double>(trace.size()));
}

namespace {

// Sum of randomly placed Gaussian blobs with random signed amplitudes.
std::vector<double> blob_texture(int w, int h, int count, double sigma, double amplitude, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(0.0, w), uy(0.0, h), ua(-amplitude, amplitude);
  std::vector<double> tex(static_cast<std::size_t>(w) * h, 0.0);
  const int reach = static_cast<int>(std::ceil(3.0 * sigma));
  for (int k = 0; k < count; ++k) {
    const double bx = ux(rng), by = uy(rng), amp = ua(rng);
    for (int y = std::max(0, static_cast<int>(by) - reach); y < std::min(h, static_cast<int>(by) + reach + 1); ++y)
      for (int x = std::max(0, static_cast<int>(bx) - reach); x < std::min(w, static_cast<int>(bx) + reach + 1); ++x) {
        const double dx = x + 0.5 - bx, dy = y + 0.5 - by;
        tex[static_cast<std::size_t>(y) * w + x] += amp * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      }
  }
  return tex;
}

}  // namespace

Sequence make_translating_clip(const TranslatingClipConfig& cfg) {
  if (cfg.width < 8 || cfg.height < 8 || cfg.frames < 2) throw InvalidArgument("clip is too small");
  if (!(cfg.start.width >= 4.0 && cfg.start.height >= 4.0)) throw InvalidArgument("clip object is too small");
  std::mt19937_64 rng(cfg.seed);
  const int ow = static_cast<int>(std::lround(cfg.start.width));
  const int oh = static_cast<int>(std::lround(cfg.start.height));
  const double area = static_cast<double>(cfg.width) * cfg.height;
  // Unstructured background (flat unless background_noise > 0), so the
  // object is the only self-match.
  std::uniform_real_distribution<double> grain(-cfg.background_noise, cfg.background_noise);
  std::vector<double> background(static_cast<std::size_t>(area));
  for (double& v : background) v = grain(rng);
  const auto object = blob_texture(ow, oh, static_cast<int>(ow * oh / 40.0), cfg.blob_sigma, 0.6, rng);

  Sequence seq;
  seq.name = "translating_clip";
  for (int f = 0; f < cfg.frames; ++f) {
    const double cx = cfg.start.cx + f * cfg.velocity[0];
    const double cy = cfg.start.cy + f * cfg.velocity[1];
    const int x0 = static_cast<int>(std::lround(cx - 0.5 * ow));
    const int y0 = static_cast<int>(std::lround(cy - 0.5 * oh));
    Image img(cfg.width, cfg.height);
    for (int y = 0; y < cfg.height; ++y)
      for (int x = 0; x < cfg.width; ++x) {
        const int ox = x - x0, oy = y - y0;
        const bool inside = ox >= 0 && oy >= 0 && ox < ow && oy < oh;
        const double v = inside ? 0.5 + object[static_cast<std::size_t>(oy) * ow + ox]
                                : 0.5 + background[static_cast<std::size_t>(y) * cfg.width + x];
        img.at(x, y) = std::clamp(v, 0.0, 1.0);
      }
    seq.images.push_back(std::move(img));
    seq.ground_truth.push_back(BoundingBox::from_top_left(x0, y0, ow, oh));
  }
  return seq;
}

void save_sequence(const Sequence& seq, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream gt(std::filesystem::path(dir) / "groundtruth.txt");
  if (!gt) throw InvalidArgument("cannot write ground truth into '" + dir + "'");
  for (std::size_t i = 0; i < seq.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%08zu.pgm", i + 1);
    save_pgm(seq.frame(i).image, (std::filesystem::path(dir) / name).string());
    const BoundingBox& b = seq.ground_truth[i];
    gt << b.left() << ',' << b.top() << ',' << b.width << ',' << b.height << '\n';
  }
}

EvalReport run_eval(Tracker& tracker, const Sequence& seq) {
  if (seq.size() < 2) throw InvalidArgument("run_eval needs a sequence with at least 2 frames");
  EvalReport report;
  report.tracker = tracker.name();
  report.sequence = seq.name;
  const auto start = std::chrono::steady_clock::now();
  try {
    tracker.init(seq.frame(0), seq.ground_truth[0]);
    for (std::size_t i = 1; i < seq.size(); ++i) {
      const BoundingBox predicted = tracker.step(seq.frame(i));
      report.frames.push_back(static_cast<int>(i));
      report.trace.push_back(iou(predicted, seq.ground_truth[i]));
    }
  } catch (const OracleError& e) {
    report.complete = false;
    report.error = e.what();
  }
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.oracle_calls = tracker.oracle_calls();
  report.config = tracker.config_snapshot();
  report.recompute_summary();
  return report;
}

EvalReport run_baseline_tm(const Sequence& seq, int stride, double search_factor) {
  TemplateMatchTracker tm(stride, search_factor);
  return run_eval(tm, seq);
}

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace

std::vector<ReportFile> emit_report(const std::vector<EvalReport>& reports, ReportFormat format) {
  if (reports.empty()) throw InvalidArgument("emit_report needs at least one report");
  for (const auto& r : reports)
    if (r.trace.empty()) throw InvalidArgument("report for '" + r.tracker + "' has an empty trace");

  std::vector<ReportFile> files;
  if (format == ReportFormat::Csv) {
    std::map<std::string, int> seen;
    std::string summary = "tracker,mean_iou,std_iou,frames,oracle_calls\n";
    for (const auto& r : reports) {
      const int n = seen[r.tracker]++;
      const std::string name = n == 0 ? r.tracker : r.tracker + "-" + std::to_string(n);
      std::string trace = "frame,iou\n";
      for (std::size_t i = 0; i < r.trace.size(); ++i) {
        const int frame = i < r.frames.size() ? r.frames[i] : static_cast<int>(i + 1);
        trace += std::to_string(frame) + "," + fixed6(r.trace[i]) + "\n";
      }
      files.push_back({name + ".csv", std::move(trace)});
      summary += name + "," + fixed6(r.mean_iou) + "," + fixed6(r.std_iou) + "," + std::to_string(r.trace.size()) +
                 "," + std::to_string(r.oracle_calls) + "\n";
    }
    files.push_back({"summary.csv", std::move(summary)});
    return files;
  }

  std::string out = "{\"reports\":[";
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& r = reports[k];
    if (k) out += ",";
    out += "{\"tracker\":" + json_string(r.tracker) + ",\"sequence\":" + json_string(r.sequence) +
           ",\"mean_iou\":" + fixed6(r.mean_iou) + ",\"std_iou\":" + fixed6(r.std_iou) +
           ",\"frames\":" + std::to_string(r.trace.size()) + ",\"oracle_calls\":" + std::to_string(r.oracle_calls) +
           ",\"complete\":" + (r.complete ? "true" : "false") + ",\"wall_time_s\":" + fixed6(r.wall_time_s) +
           ",\"config\":{";
    bool first = true;
    for (const auto& [key, value] : r.config) {
      if (!first) out += ",";
      first = false;
      out += json_string(key) + ":" + json_string(value);
    }
    out += "},\"trace\":[";
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
      if (i) out += ",";
      const int frame = i < r.frames.size() ? r.frames[i] : static_cast<int>(i + 1);
      out += "{\"frame\":" + std::to_string(frame) + ",\"iou\":" + fixed6(r.trace[i]) + "}";
    }
    out += "]}";
  }
  out += "]}\n";
  files.push_back({"report.json", std::move(out)});
  return files;
}

void write_report_files(const std::vector<ReportFile>& files, const std::string& dir) {
  fs::create_directories(dir);
  for (const auto& f : files) {
    std::ofstream out(fs::path(dir) / f.name, std::ios::binary);
    if (!out) throw DatasetError("cannot write '" + (fs::path(dir) / f.name).string() + "'");
    out << f.contents;
  }
}

MovingPeakParams dop_bench_peak(const DopBenchConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> start(0.2, 0.8);
  MovingPeakParams p;
  p.start = {start(rng), start(rng)};
  p.velocity = cfg.velocity;
  p.peak_width = cfg.peak_width;
  p.peak_height = 1.0;
  p.noise_sd = cfg.noise_sd;
  p.seed = cfg.seed;
  return p;
}

DopBenchResult run_dop_benchmark(const DopBenchConfig& cfg) {
  if (cfg.frames < 1) throw InvalidArgument("benchmark needs at least one frame");
  if (cfg.field_size < cfg.sdbta.tracker.grid_d) throw InvalidArgument("field size smaller than the score grid");
  auto objective = std::make_shared<MovingPeak>(dop_bench_peak(cfg), cfg.frames);
  DopOracle oracle(objective, {-1.0, 1.0});

  SdbtaConfig sdbta = cfg.sdbta;
  sdbta.gp.noise = std::max(sdbta.gp.noise, cfg.noise_sd * cfg.noise_sd);
  DynamicBayesOpt bo(sdbta, sdbta.gp.prior_mean.value_or(oracle.range().midpoint()), oracle.range().lo);

  DopBenchResult result;
  Location previous{0.5, 0.5};
  double total = 0.0;
  for (int t = 0; t < cfg.frames; ++t) {
    const Rect region = objective->bounds(t);
    const Frame frame{t, "", {}};
    auto evaluate = [&](const Location& p) {
      return triplet_score(oracle, frame, BoundingBox{p[0], p[1], 0.05, 0.05}, sdbta.tracker.scale_p);
    };
    const FrameOutcome out = bo.run_frame(t, region, evaluate, previous, cfg.field_size, cfg.field_size);
    const Location truth = objective->center(t);
    const double err = std::hypot(out.estimate[0] - truth[0], out.estimate[1] - truth[1]);
    result.frames.push_back({t, out.estimate, truth, err, out.best_value});
    result.cell_size = region.width / sdbta.tracker.grid_d;
    total += err;
    previous = out.estimate;
  }
  result.mean_error = total / cfg.frames;
  result.oracle_calls = oracle.calls();
  return result;
}

std::string dop_bench_csv(const DopBenchResult& result) {
  std::string out = "frame,est_x,est_y,true_x,true_y,error,best_value\n";
  for (const auto& f : result.frames) {
    out += std::to_string(f.frame) + "," + fixed6(f.estimate[0]) + "," + fixed6(f.estimate[1]) + "," +
           fixed6(f.truth[0]) + "," + fixed6(f.truth[1]) + "," + fixed6(f.error) + "," + fixed6(f.best_value) + "\n";
  }
  return out;
}

}  // namespace dynbo
