#include "pcfill/config.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "pcfill/errors.h"

namespace pcfill {

Profile Profile::preset(const std::string& name) {
  Profile p;
  p.name = name;
  if (name == "pcn") {
    // Defaults above are the pcn configuration.
  } else if (name == "snet55") {
    p.n0 = 1024;
    p.rates = {2, 4};
    p.camera_distance = 1.5;
    p.decoder_depth = 1;
  } else if (name == "tiny-test") {
    p.n_input = 256;
    p.n0 = 64;
    p.rates = {2, 2};
    p.resolution = 64;
    p.camera_distance = 1.5;
    p.channels = 32;
    p.point_feat = 32;
    p.sa_n = {64, 16};
    p.sa_k = {8, 8};
    p.sa1_mlp = {16, 32};
    p.sa2_out = 32;
    p.ec_k = {4, 4};
    p.ec1_out = 16;
    p.ec_fps = 64;
    p.ec2_out = 32;
    p.sdg_dims = {32, 32};
    p.decoder_depth = 1;
  } else {
    throw InvalidArgument("unknown profile \"" + name + "\" (expected pcn, snet55, or tiny-test)");
  }
  p.validate();
  return p;
}

void Profile::validate() const {
  auto positive = [](int v, const char* what) {
    if (v < 1) throw InvalidArgument(std::string("profile: ") + what + " must be positive");
  };
  positive(n_input, "n_input");
  positive(n0, "n0");
  positive(rates[0], "rate1");
  positive(rates[1], "rate2");
  positive(channels, "channels");
  positive(point_feat, "point_feat");
  positive(sa_n[0], "sa_n1");
  positive(sa_n[1], "sa_n2");
  positive(sa_k[0], "sa_k1");
  positive(sa_k[1], "sa_k2");
  positive(ec1_out, "ec1_out");
  positive(ec_fps, "ec_fps");
  positive(ec2_out, "ec2_out");
  positive(offset_feat, "offset_feat");
  positive(decoder_depth, "decoder_depth");
  if (n_views != 1 && n_views != 3 && n_views != 6) {
    throw InvalidArgument("profile: n_views must be 1, 3, or 6");
  }
  if (resolution < 32 || resolution % 32 != 0) {
    throw InvalidArgument("profile: resolution must be a positive multiple of 32");
  }
  if (!(camera_distance > 0.0)) throw InvalidArgument("profile: camera_distance must be positive");
  if (!(gamma > 0.0)) throw InvalidArgument("profile: gamma must be positive");
  if (densify_radius < 0 || densify_radius > 4) {
    throw InvalidArgument("profile: densify_radius must be in [0, 4]");
  }
  // Sinusoidal embeddings pair sin/cos channels.
  if (sdg_dims[0] % 2 != 0 || sdg_dims[1] % 2 != 0) {
    throw InvalidArgument("profile: sdg dims must be even");
  }
  if (sa_n[1] > sa_n[0]) throw InvalidArgument("profile: sa_n2 must be <= sa_n1");
}

void apply_config_kv(Profile& p, const std::string& key, const std::string& value) {
  auto as_int = [&](const std::string& v) {
    std::size_t used = 0;
    int out;
    try {
      out = std::stoi(v, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("config: bad integer \"" + v + "\" for key " + key);
    }
    if (used != v.size()) throw InvalidArgument("config: bad integer \"" + v + "\" for key " + key);
    return out;
  };
  auto as_double = [&](const std::string& v) {
    std::size_t used = 0;
    double out;
    try {
      out = std::stod(v, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("config: bad number \"" + v + "\" for key " + key);
    }
    if (used != v.size()) throw InvalidArgument("config: bad number \"" + v + "\" for key " + key);
    return out;
  };

  if (key == "n_views") p.n_views = as_int(value);
  else if (key == "resolution") p.resolution = as_int(value);
  else if (key == "camera_distance") p.camera_distance = as_double(value);
  else if (key == "n0") p.n0 = as_int(value);
  else if (key == "channels") p.channels = as_int(value);
  else if (key == "seed") {
    try {
      std::size_t used = 0;
      p.seed = std::stoull(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw InvalidArgument("config: bad seed \"" + value + "\"");
    }
  }
  else if (key == "n_input") p.n_input = as_int(value);
  else if (key == "rate1") p.rates[0] = as_int(value);
  else if (key == "rate2") p.rates[1] = as_int(value);
  else if (key == "gamma") p.gamma = as_double(value);
  else if (key == "fov_degrees") p.fov_degrees = as_double(value);
  else if (key == "densify_radius") p.densify_radius = as_int(value);
  else if (key == "point_feat") p.point_feat = as_int(value);
  else if (key == "sdg_dim1") p.sdg_dims[0] = as_int(value);
  else if (key == "sdg_dim2") p.sdg_dims[1] = as_int(value);
  else if (key == "decoder_depth") p.decoder_depth = as_int(value);
  else if (key == "sa_n1") p.sa_n[0] = as_int(value);
  else if (key == "sa_n2") p.sa_n[1] = as_int(value);
  else if (key == "sa_k1") p.sa_k[0] = as_int(value);
  else if (key == "sa_k2") p.sa_k[1] = as_int(value);
  else if (key == "sa1_mlp1") p.sa1_mlp[0] = as_int(value);
  else if (key == "sa1_mlp2") p.sa1_mlp[1] = as_int(value);
  else if (key == "sa2_out") p.sa2_out = as_int(value);
  else if (key == "ec1_out") p.ec1_out = as_int(value);
  else if (key == "ec_fps") p.ec_fps = as_int(value);
  else if (key == "ec2_out") p.ec2_out = as_int(value);
  else if (key == "ec_k1") p.ec_k[0] = as_int(value);
  else if (key == "ec_k2") p.ec_k[1] = as_int(value);
  else if (key == "offset_feat") p.offset_feat = as_int(value);
  else throw InvalidArgument("config: unknown key \"" + key + "\"");
}

static std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void apply_config_file(Profile& p, const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InvalidArgument("cannot open config: " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) +
                            ": expected \"key = value\"");
    }
    apply_config_kv(p, strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
  }
  p.validate();
}

}  // namespace pcfill
