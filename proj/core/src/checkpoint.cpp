#include "deepr/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "deepr/error.hpp"

namespace deepr {

namespace {

constexpr const char* kMagic = "deepr-checkpoint";
constexpr int kVersion = 1;

std::string hexf(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

void write_biases(std::ostream& os, const std::vector<std::vector<double>>& biases) {
  os << "biases " << biases.size() << '\n';
  for (const auto& b : biases) {
    os << b.size();
    for (const double v : b) os << ' ' << hexf(v);
    os << '\n';
  }
}

std::string sign_string(std::span<const std::int8_t> signs) {
  std::string s;
  s.reserve(signs.size());
  for (const auto v : signs) s.push_back(v > 0 ? '+' : '-');
  return s;
}

class Reader {
 public:
  explicit Reader(const std::string& text) : in_(text) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw FormatError("checkpoint: unexpected end of input");
    return w;
  }

  void expect(const std::string& keyword) {
    const std::string w = word();
    if (w != keyword) throw FormatError("checkpoint: expected '" + keyword + "', found '" + w + "'");
  }

  std::size_t count() {
    const std::string w = word();
    char* end = nullptr;
    const unsigned long long v = std::strtoull(w.c_str(), &end, 10);
    if (w.empty() || *end != '\0' || w[0] == '-') throw FormatError("checkpoint: bad count '" + w + "'");
    return static_cast<std::size_t>(v);
  }

  double real() {
    const std::string w = word();
    char* end = nullptr;
    const double v = std::strtod(w.c_str(), &end);
    if (*end != '\0') throw FormatError("checkpoint: bad number '" + w + "'");
    return v;
  }

 private:
  std::istringstream in_;
};

std::vector<std::vector<double>> read_biases(Reader& r) {
  r.expect("biases");
  std::vector<std::vector<double>> out(r.count());
  for (auto& b : out) {
    b.resize(r.count());
    for (double& v : b) v = r.real();
  }
  return out;
}

std::vector<int> read_signs(Reader& r, std::size_t m) {
  r.expect("signs");
  const std::string s = m == 0 ? std::string() : r.word();
  if (s.size() != m) throw FormatError("checkpoint: sign string has wrong length");
  std::vector<int> out;
  for (const char c : s) {
    if (c != '+' && c != '-') throw FormatError("checkpoint: bad sign character");
    out.push_back(c == '+' ? 1 : -1);
  }
  return out;
}

void check_biases(const std::vector<std::vector<double>>& biases,
                  std::span<const LayerShape> layers) {
  if (biases.size() != layers.size()) throw FormatError("checkpoint: bias layer count mismatch");
  for (const auto& l : layers) {
    if (biases[l.index].size() != l.fan_out) throw FormatError("checkpoint: bias size mismatch");
  }
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& c) {
  const int holders = c.sparse.has_value() + c.soft.has_value() + c.dense.has_value();
  require(holders == 1, "encode_checkpoint: exactly one parameter holder must be set");
  std::ostringstream os;
  os << kMagic << ' ' << kVersion << '\n';
  os << "layers " << c.layer_sizes.size();
  for (const auto n : c.layer_sizes) os << ' ' << n;
  os << "\niteration " << c.iteration << "\nepoch " << c.epoch << '\n';
  os << "streams " << c.streams.size() << '\n';
  for (const auto& s : c.streams) os << to_string(s.tag()) << ' ' << s.seed() << ' ' << s.counter() << '\n';

  if (c.sparse) {
    const auto& st = *c.sparse;
    os << "kind sparse\nbudget " << st.budget() << "\npolicy "
       << (st.sign_policy() == SignPolicy::redraw ? "redraw" : "keep") << '\n';
    os << "active " << st.active_count() << '\n';
    for (const std::size_t k : st.active()) os << k << ' ' << hexf(st.theta(k)) << '\n';
    os << "signs " << sign_string(st.signs()) << '\n';
    write_biases(os, st.biases());
  } else if (c.soft) {
    const auto& st = *c.soft;
    os << "kind soft\ntheta_min " << hexf(st.theta_min()) << '\n';
    os << "theta " << st.potential() << '\n';
    for (const double t : st.thetas()) os << hexf(t) << '\n';
    os << "signs " << sign_string(st.signs()) << '\n';
    write_biases(os, st.biases());
  } else {
    const auto& net = *c.dense;
    os << "kind dense\nweights " << net.weights.size() << '\n';
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      const auto& w = net.weights[l];
      os << w.rows() << ' ' << w.cols() << '\n';
      for (std::size_t r = 0; r < w.rows(); ++r) {
        const auto row = w.row(r);
        for (std::size_t j = 0; j < row.size(); ++j) os << (j ? " " : "") << hexf(row[j]);
        os << '\n';
      }
      const bool masked = l < net.masks.size() && !net.masks[l].empty();
      os << "mask ";
      if (!masked) {
        os << "none\n";
      } else {
        std::string s;
        for (const auto v : net.masks[l]) s.push_back(v ? '1' : '0');
        os << s << '\n';
      }
    }
    write_biases(os, net.biases);
  }
  os << "end\n";
  return os.str();
}

Checkpoint decode_checkpoint(const std::string& text) {
  Reader r(text);
  r.expect(kMagic);
  if (r.count() != kVersion) throw FormatError("checkpoint: unsupported version");
  Checkpoint c;
  r.expect("layers");
  c.layer_sizes.resize(r.count());
  for (auto& n : c.layer_sizes) n = r.count();
  if (c.layer_sizes.size() < 2) throw FormatError("checkpoint: need at least two layer sizes");
  const auto layers = make_layer_shapes(c.layer_sizes);
  const std::size_t m = total_connections(layers);
  r.expect("iteration");
  c.iteration = r.count();
  r.expect("epoch");
  c.epoch = r.count();
  r.expect("streams");
  const std::size_t n_streams = r.count();
  for (std::size_t i = 0; i < n_streams; ++i) {
    const auto tag = stream_tag_from_string(r.word());
    const auto seed = static_cast<std::uint64_t>(r.count());
    const auto counter = static_cast<std::uint64_t>(r.count());
    c.streams.emplace_back(seed, tag, counter);
  }
  r.expect("kind");
  const std::string kind = r.word();
  if (kind == "sparse") {
    r.expect("budget");
    const std::size_t budget = r.count();
    r.expect("policy");
    const std::string policy = r.word();
    if (policy != "redraw" && policy != "keep") throw FormatError("checkpoint: bad sign policy");
    if (budget > m) throw FormatError("checkpoint: budget exceeds the connection count");
    ConnectionStore st(layers, budget, policy == "redraw" ? SignPolicy::redraw : SignPolicy::keep);
    r.expect("active");
    const std::size_t n_active = r.count();
    if (n_active > budget) throw FormatError("checkpoint: more active connections than the budget");
    std::vector<std::pair<std::size_t, double>> active(n_active);
    for (auto& [k, theta] : active) {
      k = r.count();
      theta = r.real();
      if (k >= m || !(theta >= 0.0)) throw FormatError("checkpoint: bad active entry");
    }
    const auto signs = read_signs(r, m);
    for (const auto& [k, theta] : active) {
      if (st.is_active(k)) throw FormatError("checkpoint: duplicate active id");
      st.activate(k, theta, signs[k]);
    }
    for (std::size_t k = 0; k < m; ++k)
      if (!st.is_active(k)) st.set_sign(k, signs[k]);
    st.biases() = read_biases(r);
    check_biases(st.biases(), layers);
    c.sparse = std::move(st);
  } else if (kind == "soft") {
    r.expect("theta_min");
    const double theta_min = r.real();
    if (!(theta_min < 0.0)) throw FormatError("checkpoint: theta_min must be negative");
    SoftStore st(layers, theta_min);
    r.expect("theta");
    if (r.count() != m) throw FormatError("checkpoint: theta count mismatch");
    std::vector<double> theta(m);
    for (double& t : theta) t = r.real();
    const auto signs = read_signs(r, m);
    for (std::size_t k = 0; k < m; ++k) {
      if (theta[k] < theta_min) throw FormatError("checkpoint: theta below theta_min");
      st.set(k, theta[k], signs[k]);
    }
    st.biases() = read_biases(r);
    check_biases(st.biases(), layers);
    c.soft = std::move(st);
  } else if (kind == "dense") {
    DenseNet net;
    r.expect("weights");
    if (r.count() != layers.size()) throw FormatError("checkpoint: weight layer count mismatch");
    for (const auto& l : layers) {
      const std::size_t rows = r.count();
      const std::size_t cols = r.count();
      if (rows != l.fan_in || cols != l.fan_out) throw FormatError("checkpoint: weight shape mismatch");
      Matrix w(rows, cols);
      for (double& v : w.data()) v = r.real();
      net.weights.push_back(std::move(w));
      r.expect("mask");
      const std::string mask = r.word();
      std::vector<std::uint8_t> bits;
      if (mask != "none") {
        if (mask.size() != l.size()) throw FormatError("checkpoint: mask length mismatch");
        for (const char ch : mask) {
          if (ch != '0' && ch != '1') throw FormatError("checkpoint: bad mask character");
          bits.push_back(ch == '1');
        }
      }
      net.masks.push_back(std::move(bits));
    }
    net.biases = read_biases(r);
    check_biases(net.biases, layers);
    c.dense = std::move(net);
  } else {
    throw FormatError("checkpoint: unknown kind '" + kind + "'");
  }
  r.expect("end");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string text = encode_checkpoint(ckpt);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write checkpoint " + path.string());
  out << text;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace deepr
