#include "spancoref/nn/params.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace coref::nn {

using nlohmann::json;

namespace {
constexpr char kMagic[8] = {'S', 'P', 'C', 'K', 'P', 'T', '0', '1'};
}

Parameter* ParamStore::create(const std::string& name, int rows, int cols) {
  if (find(name))
    throw std::logic_error("ParamStore: duplicate parameter " + name);
  params_.push_back(std::make_unique<Parameter>(name, rows, cols));
  return params_.back().get();
}

Parameter* ParamStore::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}

Parameter* ParamStore::require(const std::string& name) const {
  Parameter* p = find(name);
  if (!p) throw std::logic_error("ParamStore: missing parameter " + name);
  return p;
}

void ParamStore::zero_grads() {
  for (const auto& p : params_) p->zero_grad();
}

size_t ParamStore::total_values() const {
  size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParamStore::freeze_prefix(const std::string& prefix, bool frozen) {
  for (const auto& p : params_)
    if (p->name.rfind(prefix, 0) == 0) p->frozen = frozen;
}

void ParamStore::save(const std::string& path,
                      const std::string& config_json) const {
  json header;
  header["config"] = json::parse(config_json.empty() ? "{}" : config_json);
  header["params"] = json::array();
  for (const auto& p : params_)
    header["params"].push_back(
        {{"name", p->name}, {"rows", p->value.rows}, {"cols", p->value.cols}});
  const std::string htext = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  const uint64_t hlen = htext.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  for (const auto& p : params_)
    out.write(reinterpret_cast<const char*>(p->value.data.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

namespace {
json read_header(std::ifstream& in, const std::string& path) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string htext(hlen, '\0');
  in.read(htext.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw std::runtime_error("truncated checkpoint header: " + path);
  return json::parse(htext);
}
}  // namespace

std::string ParamStore::load_into(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  const json header = read_header(in, path);

  const auto& plist = header.at("params");
  if (plist.size() != params_.size())
    throw std::runtime_error("checkpoint " + path + ": expected " +
                             std::to_string(params_.size()) +
                             " parameters, file has " +
                             std::to_string(plist.size()));
  for (size_t i = 0; i < params_.size(); ++i) {
    const auto& meta = plist[i];
    Parameter* p = params_[i].get();
    if (meta.at("name").get<std::string>() != p->name ||
        meta.at("rows").get<int>() != p->value.rows ||
        meta.at("cols").get<int>() != p->value.cols)
      throw std::runtime_error("checkpoint " + path +
                               ": parameter mismatch at '" + p->name + "'");
    in.read(reinterpret_cast<char*>(p->value.data.data()),
            static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!in) throw std::runtime_error("truncated checkpoint data: " + path);
  return header.at("config").dump();
}

std::string ParamStore::read_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  return read_header(in, path).at("config").dump();
}

AdamOptimizer::AdamOptimizer(ParamStore& store,
                             std::vector<OptimizerGroup> groups, double beta1,
                             double beta2, double eps)
    : store_(&store),
      groups_(std::move(groups)),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {
  for (const auto& p : store_->params()) {
    m_.emplace_back(p->value.rows, p->value.cols);
    v_.emplace_back(p->value.rows, p->value.cols);
  }
}

double AdamOptimizer::lr_for(const std::string& name) const {
  for (const auto& g : groups_)
    if (name.rfind(g.name_prefix, 0) == 0) return g.learning_rate;
  throw std::logic_error("AdamOptimizer: no learning-rate group for " + name);
}

void AdamOptimizer::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const auto& params = store_->params();
  for (size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    if (p.frozen) continue;
    const double lr = lr_for(p.name);
    for (size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad.data[k];
      m_[i].data[k] = beta1_ * m_[i].data[k] + (1.0 - beta1_) * g;
      v_[i].data[k] = beta2_ * v_[i].data[k] + (1.0 - beta2_) * g * g;
      const double mhat = m_[i].data[k] / bc1;
      const double vhat = v_[i].data[k] / bc2;
      p.value.data[k] -= lr * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void AdamOptimizer::save_state(const std::string& path) const {
  json header;
  header["step"] = t_;
  header["params"] = json::array();
  for (const auto& p : store_->params())
    header["params"].push_back(
        {{"name", p->name}, {"rows", p->value.rows}, {"cols", p->value.cols}});
  const std::string htext = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open optimizer state: " + path);
  out.write(kMagic, sizeof(kMagic));
  const uint64_t hlen = htext.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  for (size_t i = 0; i < m_.size(); ++i) {
    out.write(reinterpret_cast<const char*>(m_[i].data.data()),
              static_cast<std::streamsize>(m_[i].size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(v_[i].data.data()),
              static_cast<std::streamsize>(v_[i].size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("optimizer state write failed: " + path);
}

void AdamOptimizer::load_state(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open optimizer state: " + path);
  const json header = read_header(in, path);
  const auto& plist = header.at("params");
  if (plist.size() != store_->params().size())
    throw std::runtime_error("optimizer state " + path +
                             ": parameter count mismatch");
  for (size_t i = 0; i < plist.size(); ++i)
    if (plist[i].at("name").get<std::string>() != store_->params()[i]->name)
      throw std::runtime_error("optimizer state " + path +
                               ": parameter order mismatch");
  t_ = header.at("step").get<int64_t>();
  for (size_t i = 0; i < m_.size(); ++i) {
    in.read(reinterpret_cast<char*>(m_[i].data.data()),
            static_cast<std::streamsize>(m_[i].size() * sizeof(double)));
    in.read(reinterpret_cast<char*>(v_[i].data.data()),
            static_cast<std::streamsize>(v_[i].size() * sizeof(double)));
  }
  if (!in) throw std::runtime_error("truncated optimizer state: " + path);
}

}  // namespace coref::nn
