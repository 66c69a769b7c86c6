#pragma once

#include <string>
#include <vector>

#include "pptgnn/flow_ingest.hpp"

namespace testutil {

inline pptgnn::FlowRecord make_flow(uint64_t id, double start, double end, std::string src, std::string dst,
                                    int32_t label = pptgnn::kUnlabeled) {
  pptgnn::FlowRecord f;
  f.flow_id = id;
  f.start_time = start;
  f.end_time = end;
  f.duration = end - start;
  f.src_ip = std::move(src);
  f.dst_ip = std::move(dst);
  f.src_port = static_cast<uint16_t>(50000 + id);
  f.dst_port = 80;
  f.protocol = 6;
  f.in_bytes = 100 + 10 * id;
  f.out_bytes = 200 + 3 * id;
  f.in_pkts = 2 + id % 5;
  f.out_pkts = 1 + id % 3;
  f.tcp_flags = 0x18;
  f.label = label;
  return f;
}

}  // namespace testutil
