#pragma once

#include <string>

#include "mgccf/model.hpp"
#include "mgccf/run_config.hpp"
#include "mgccf/serialize.hpp"

namespace mgccf {

void save_multi_gccf(const std::string& path, const MultiGccfModel& model);
MultiGccfModel load_multi_gccf(const std::string& path);
MultiGccfModel multi_gccf_from_checkpoint(const Checkpoint& ck);

void save_bprmf(const std::string& path, const BprmfModel& model);
BprmfModel load_bprmf(const std::string& path);
BprmfModel bprmf_from_checkpoint(const Checkpoint& ck);

}  // namespace mgccf
