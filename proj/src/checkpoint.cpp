#include "trajsmooth/checkpoint.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "trajsmooth/errors.hpp"

namespace trajsmooth {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ParseError("checkpoint: bad number '" + s + "'");
  }
  return v;
}

long to_long(const std::string& s) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ParseError("checkpoint: bad integer '" + s + "'");
  }
  return v;
}

}  // namespace

std::map<std::string, std::string> train_config_to_kv(const TrainConfig& c) {
  std::map<std::string, std::string> kv;
  kv["beta"] = fmt(c.loss.beta);
  kv["kl_weight"] = fmt(c.loss.kl_weight);
  kv["learning_rate"] = fmt(c.learning_rate);
  kv["epochs"] = std::to_string(c.epochs);
  kv["batch_size"] = std::to_string(c.batch_size);
  kv["seed"] = std::to_string(c.seed);
  kv["kde_samples"] = std::to_string(c.kde_samples);
  kv["sample_stride"] = std::to_string(c.sample_stride);
  kv["grad_clip_norm"] = fmt(c.grad_clip_norm);
  kv["smooth_term"] = c.smooth_term ? "1" : "0";
  kv["history_steps"] = std::to_string(c.model.encoder.history_steps);
  kv["hidden_dim"] = std::to_string(c.model.encoder.hidden_dim);
  kv["edge_hidden_dim"] = std::to_string(c.model.encoder.edge_hidden_dim);
  kv["attention_dim"] = std::to_string(c.model.encoder.attention_dim);
  kv["num_edge_classes"] = std::to_string(c.model.encoder.num_edge_classes);
  kv["num_modes"] = std::to_string(c.model.latent.num_modes);
  kv["future_hidden_dim"] = std::to_string(c.model.latent.future_hidden_dim);
  kv["latent_hidden_dim"] = std::to_string(c.model.latent_hidden_dim);
  kv["decoder_hidden_dim"] = std::to_string(c.model.decoder_hidden_dim);
  kv["horizon"] = std::to_string(c.model.horizon);
  kv["dt"] = fmt(c.model.dt);
  kv["input_steps"] = std::to_string(c.model.input_steps);
  kv["rnn_cell"] = c.model.rnn_cell;
  return kv;
}

TrainConfig train_config_from_kv(const std::map<std::string, std::string>& kv) {
  TrainConfig c;
  const auto get = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(std::string("config: missing key '") + key + "'");
    return it->second;
  };
  c.loss.beta = to_double(get("beta"));
  c.loss.kl_weight = to_double(get("kl_weight"));
  c.learning_rate = to_double(get("learning_rate"));
  c.epochs = static_cast<int>(to_long(get("epochs")));
  c.batch_size = static_cast<int>(to_long(get("batch_size")));
  c.seed = static_cast<std::uint64_t>(to_long(get("seed")));
  c.kde_samples = static_cast<int>(to_long(get("kde_samples")));
  c.sample_stride = static_cast<int>(to_long(get("sample_stride")));
  c.grad_clip_norm = to_double(get("grad_clip_norm"));
  c.smooth_term = get("smooth_term") == "1" || get("smooth_term") == "true";
  c.model.encoder.history_steps = static_cast<int>(to_long(get("history_steps")));
  c.model.encoder.hidden_dim = static_cast<int>(to_long(get("hidden_dim")));
  c.model.encoder.edge_hidden_dim = static_cast<int>(to_long(get("edge_hidden_dim")));
  c.model.encoder.attention_dim = static_cast<int>(to_long(get("attention_dim")));
  c.model.encoder.num_edge_classes = static_cast<int>(to_long(get("num_edge_classes")));
  c.model.latent.num_modes = static_cast<int>(to_long(get("num_modes")));
  c.model.latent.future_hidden_dim = static_cast<int>(to_long(get("future_hidden_dim")));
  c.model.latent_hidden_dim = static_cast<int>(to_long(get("latent_hidden_dim")));
  c.model.decoder_hidden_dim = static_cast<int>(to_long(get("decoder_hidden_dim")));
  c.model.horizon = static_cast<int>(to_long(get("horizon")));
  c.model.dt = to_double(get("dt"));
  c.model.input_steps = static_cast<int>(to_long(get("input_steps")));
  c.model.rnn_cell = get("rnn_cell");
  return c;
}

Checkpoint make_checkpoint(const TrainConfig& config, const TrainResult& result) {
  Checkpoint ckpt;
  ckpt.config = config;
  ckpt.params = result.model.params();
  ckpt.standardizer = result.standardizer;
  ckpt.history = result.history;
  ckpt.final_val_loss = result.final_val_loss;
  return ckpt;
}

std::string checkpoint_to_text(const Checkpoint& ckpt) {
  std::string out = "TRAJSMOOTH-CKPT " + std::to_string(ckpt.version) + "\n";
  const auto kv = train_config_to_kv(ckpt.config);
  out += "config " + std::to_string(kv.size()) + "\n";
  for (const auto& [k, v] : kv) out += k + " " + v + "\n";
  out += "standardizer " + fmt(ckpt.standardizer.mean(0)) + " " + fmt(ckpt.standardizer.mean(1)) +
         " " + fmt(ckpt.standardizer.scale(0)) + " " + fmt(ckpt.standardizer.scale(1)) + " " +
         (ckpt.standardizer.degenerate_warning ? "1" : "0") + "\n";
  out += "history " + std::to_string(ckpt.history.size()) + "\n";
  for (const auto& e : ckpt.history) {
    out += fmt(e.nll) + " " + fmt(e.kl) + " " + fmt(e.smooth) + " " + fmt(e.total) + "\n";
  }
  out += "val_loss " + fmt(ckpt.final_val_loss) + "\n";
  out += "arrays " + std::to_string(ckpt.params.entries().size()) + "\n";
  for (const auto& e : ckpt.params.entries()) {
    out += e.name + " " + std::to_string(e.value.rows()) + " " +
           std::to_string(e.value.cols()) + "\n";
    for (Eigen::Index r = 0; r < e.value.rows(); ++r) {
      for (Eigen::Index cidx = 0; cidx < e.value.cols(); ++cidx) {
        if (cidx > 0) out += " ";
        out += fmt(e.value(r, cidx));
      }
      out += "\n";
    }
  }
  out += "end\n";
  return out;
}

namespace {

std::vector<std::string> tokens(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

std::string next_line(std::istringstream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("checkpoint: truncated file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

Checkpoint checkpoint_from_text(const std::string& text) {
  std::istringstream in(text);
  Checkpoint ckpt;

  auto header = tokens(next_line(in));
  if (header.size() != 2 || header[0] != "TRAJSMOOTH-CKPT") {
    throw ParseError("checkpoint: bad magic line");
  }
  ckpt.version = static_cast<int>(to_long(header[1]));
  if (ckpt.version != 1) {
    throw ParseError("checkpoint: unsupported version " + header[1]);
  }

  auto cfg_line = tokens(next_line(in));
  if (cfg_line.size() != 2 || cfg_line[0] != "config") throw ParseError("checkpoint: expected config");
  std::map<std::string, std::string> kv;
  for (long i = 0; i < to_long(cfg_line[1]); ++i) {
    const std::string line = next_line(in);
    const auto sp = line.find(' ');
    if (sp == std::string::npos) throw ParseError("checkpoint: bad config line '" + line + "'");
    kv[line.substr(0, sp)] = line.substr(sp + 1);
  }
  ckpt.config = train_config_from_kv(kv);

  auto st_line = tokens(next_line(in));
  if (st_line.size() != 6 || st_line[0] != "standardizer") {
    throw ParseError("checkpoint: expected standardizer");
  }
  ckpt.standardizer.mean << to_double(st_line[1]), to_double(st_line[2]);
  ckpt.standardizer.scale << to_double(st_line[3]), to_double(st_line[4]);
  ckpt.standardizer.degenerate_warning = st_line[5] == "1";

  auto hist_line = tokens(next_line(in));
  if (hist_line.size() != 2 || hist_line[0] != "history") {
    throw ParseError("checkpoint: expected history");
  }
  for (long i = 0; i < to_long(hist_line[1]); ++i) {
    auto vals = tokens(next_line(in));
    if (vals.size() != 4) throw ParseError("checkpoint: bad history line");
    EpochStats e;
    e.nll = to_double(vals[0]);
    e.kl = to_double(vals[1]);
    e.smooth = to_double(vals[2]);
    e.total = to_double(vals[3]);
    ckpt.history.push_back(e);
  }

  auto val_line = tokens(next_line(in));
  if (val_line.size() != 2 || val_line[0] != "val_loss") {
    throw ParseError("checkpoint: expected val_loss");
  }
  ckpt.final_val_loss = to_double(val_line[1]);

  auto arr_line = tokens(next_line(in));
  if (arr_line.size() != 2 || arr_line[0] != "arrays") {
    throw ParseError("checkpoint: expected arrays");
  }
  for (long i = 0; i < to_long(arr_line[1]); ++i) {
    auto head = tokens(next_line(in));
    if (head.size() != 3) throw ParseError("checkpoint: bad array header");
    const int rows = static_cast<int>(to_long(head[1]));
    const int cols = static_cast<int>(to_long(head[2]));
    Eigen::MatrixXd& m = ckpt.params.add(head[0], rows, cols, 1);
    for (int r = 0; r < rows; ++r) {
      auto vals = tokens(next_line(in));
      if (static_cast<int>(vals.size()) != cols) {
        throw ParseError("checkpoint: bad array row in '" + head[0] + "'");
      }
      for (int cidx = 0; cidx < cols; ++cidx) {
        m(r, cidx) = to_double(vals[static_cast<std::size_t>(cidx)]);
      }
    }
  }
  if (next_line(in) != "end") throw ParseError("checkpoint: missing end marker");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path.string());
  out << checkpoint_to_text(ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_text(ss.str());
}

}  // namespace trajsmooth
