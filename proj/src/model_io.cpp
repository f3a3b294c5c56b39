#include "mgccf/model_io.hpp"

#include "mgccf/errors.hpp"

namespace mgccf {

namespace {

void copy_from_checkpoint(const Checkpoint& ck, std::vector<Parameter*> params) {
  for (Parameter* p : params) {
    const Parameter* src = ck.find(p->name);
    if (!src) throw ConfigError("checkpoint is missing parameter '" + p->name + "'");
    if (src->value.rows != p->value.rows || src->value.cols != p->value.cols) {
      throw ConfigError("checkpoint parameter '" + p->name + "' has shape " +
                        src->value.shape_str() + ", expected " + p->value.shape_str());
    }
    p->value = src->value;
    p->adam_m = src->adam_m;
    p->adam_v = src->adam_v;
    p->step_count = src->step_count;
    p->frozen = src->frozen;
    p->zero_grad();
  }
}

}  // namespace

void save_multi_gccf(const std::string& path, const MultiGccfModel& model) {
  CheckpointHeader h;
  h.model_type = "multi_gccf";
  h.model = model.config;
  h.num_users = model.num_users;
  h.num_items = model.num_items;
  std::vector<const Parameter*> params;
  for (const Parameter* p : model.parameters()) params.push_back(p);
  save_checkpoint(path, to_json_string(h), params);
}

MultiGccfModel multi_gccf_from_checkpoint(const Checkpoint& ck) {
  const CheckpointHeader h = checkpoint_header_from_json(ck.header_json);
  if (h.model_type != "multi_gccf") {
    throw ConfigError("checkpoint holds a '" + h.model_type + "' model, expected multi_gccf");
  }
  Rng scratch(0);
  MultiGccfModel model = MultiGccfModel::init(h.model, h.num_users, h.num_items, scratch);
  copy_from_checkpoint(ck, model.parameters());
  return model;
}

MultiGccfModel load_multi_gccf(const std::string& path) {
  return multi_gccf_from_checkpoint(load_checkpoint(path));
}

void save_bprmf(const std::string& path, const BprmfModel& model) {
  CheckpointHeader h;
  h.model_type = "bprmf";
  h.num_users = model.e_user.value.rows;
  h.num_items = model.e_item.value.rows;
  h.bprmf_dim = model.dim;
  h.bprmf_lambda = model.lambda_reg;
  save_checkpoint(path, to_json_string(h), {&model.e_user, &model.e_item});
}

BprmfModel bprmf_from_checkpoint(const Checkpoint& ck) {
  const CheckpointHeader h = checkpoint_header_from_json(ck.header_json);
  if (h.model_type != "bprmf") {
    throw ConfigError("checkpoint holds a '" + h.model_type + "' model, expected bprmf");
  }
  Rng scratch(0);
  BprmfModel model = BprmfModel::init(h.num_users, h.num_items, h.bprmf_dim, h.bprmf_lambda,
                                      scratch);
  copy_from_checkpoint(ck, model.parameters());
  return model;
}

BprmfModel load_bprmf(const std::string& path) {
  return bprmf_from_checkpoint(load_checkpoint(path));
}

}  // namespace mgccf
