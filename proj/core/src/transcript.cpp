#include "bugloc/agent.hpp"

namespace bugloc {

nlohmann::json event_to_json(const AgentEvent& e) {
    nlohmann::json j = {{"type", "event"},
                        {"step", e.step},
                        {"phase", e.phase},
                        {"origin", e.origin},
                        {"prompt_sent", e.prompt_sent},
                        {"raw_reply", e.raw_reply},
                        {"finish_reason", e.finish_reason},
                        {"validation_outcome", e.validation_outcome},
                        {"correction_attempt", e.correction_attempt}};
    j["parsed_tool_call"] = e.parsed_tool_call
                                ? nlohmann::json{{"tool", to_string(e.parsed_tool_call->tool)},
                                                 {"args", e.parsed_tool_call->args}}
                                : nlohmann::json(nullptr);
    j["tool_result"] = e.tool_result ? *e.tool_result : nlohmann::json(nullptr);
    return j;
}

std::string transcript_to_jsonl(const AgentTranscript& t) {
    std::string out;
    auto line = [&out](const nlohmann::json& j) {
        out += j.dump();
        out += '\n';
    };
    line({{"type", "header"},
          {"task_id", t.task_id},
          {"mode", to_string(t.mode)},
          {"answer_k", t.answer_k},
          {"seeded_query", t.seeded_query}});
    for (const auto& e : t.events) line(event_to_json(e));
    line({{"type", "self_evaluation"},
          {"performed", t.self_evaluation.performed},
          {"prompt", t.self_evaluation.prompt},
          {"raw_reply", t.self_evaluation.raw_reply},
          {"result", t.self_evaluation.result}});
    const auto& c = t.error_counters;
    const auto& u = t.tool_usage;
    line({{"type", "summary"},
          {"outcome", to_string(t.outcome)},
          {"final_ranking", t.final_ranking},
          {"self_eval_ranking", t.self_eval_ranking},
          {"error_counters",
           {{"aborted_file_views", c.aborted_file_views},
            {"timeouts", c.timeouts},
            {"aborted_invalid_json", c.aborted_invalid_json},
            {"duplicate_view_warnings", c.duplicate_view_warnings}}},
          {"tool_usage",
           {{"extract_relevant", u.extract_relevant},
            {"bm25_topk", u.bm25_topk},
            {"view_file", u.view_file},
            {"view_file_unique", u.view_file_unique},
            {"view_readme", u.view_readme},
            {"final_answer", u.final_answer}}},
          {"notes", t.notes}});
    return out;
}

}  // namespace bugloc
