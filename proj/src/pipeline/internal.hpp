#pragma once

#include <string>

#include "ontoforge/pipeline.hpp"

namespace ontoforge::detail {

void record(Project& project, Actor actor, const std::string& action, const std::string& subject,
            nlohmann::json data = nlohmann::json::object());

void set_stage_status(Project& project, Stage stage, StageStatus status, const std::string& reason = {});

/// Promotes AwaitingReview stages whose gate now holds, in stage order.
void refresh_stages(Project& project);

std::string glossary_lines(const Project& project);

std::vector<const CompetencyQuestionEntry*> accepted_cqs(const Project& project);

}  // namespace ontoforge::detail
