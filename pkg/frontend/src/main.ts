// Browser entry point: renders into #app and delegates data-action clicks to
// the controller. The service base URL comes from ?service=... or defaults
// to the same origin.

import { HttpApi } from "./api.js";
import { Controller } from "./controller.js";
import { findNode, type AppState } from "./state.js";
import { renderCompareScreen } from "./views/compare.js";
import { renderInspector } from "./views/inspector.js";
import { renderEditor, renderPicker } from "./views/picker.js";
import { renderTreeScreen } from "./views/tree.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("service") ?? "";
const root = document.getElementById("app")!;

function render(state: AppState): void {
  switch (state.screen) {
    case "picker":
      root.innerHTML = renderPicker(state);
      break;
    case "editor":
      root.innerHTML = renderEditor(state);
      break;
    case "tree": {
      root.innerHTML = renderTreeScreen(state);
      const pane = document.getElementById("inspector");
      if (pane && state.inspectedNodeId && state.problem) {
        const node = findNode(state.problem.tree, state.inspectedNodeId);
        if (node) pane.innerHTML = renderInspector(node, state.problem.tree.payload);
      }
      break;
    }
    case "compare":
      root.innerHTML = renderCompareScreen(state);
      break;
  }
}

const controller = new Controller(new HttpApi(baseUrl), window.localStorage, render);

root.addEventListener("click", (event) => {
  const target = (event.target as HTMLElement).closest("[data-action]") as HTMLElement | null;
  if (!target) return;
  const action = target.dataset.action!;
  const nodeId = target.dataset.node ?? "";
  switch (action) {
    case "load-types":
      void controller.loadTypes();
      break;
    case "pick-type":
      controller.pickType(target.dataset.type!);
      break;
    case "back-to-picker":
      controller.backToPicker();
      break;
    case "submit-problem": {
      const input = document.getElementById("instance-input") as HTMLTextAreaElement | null;
      controller.setInput(input?.value ?? "");
      void controller.submitProblem();
      break;
    }
    case "inspect":
      controller.inspect(nodeId);
      break;
    case "load-suggestions":
      void controller.loadSuggestions(nodeId);
      break;
    case "select-solver":
      void controller.selectSolver(nodeId, target.dataset.solver!).then(() => controller.loadSuggestions(nodeId));
      break;
    case "execute-node":
      void controller.executeNode(nodeId);
      break;
    case "refresh-tree":
      void controller.refreshTree();
      break;
    case "open-compare":
      controller.openCompare();
      break;
    case "back-to-tree":
      controller.backToTree();
      break;
    case "run-compare": {
      const trials = Number((document.getElementById("compare-trials") as HTMLInputElement)?.value ?? "2");
      const seed = Number((document.getElementById("compare-seed") as HTMLInputElement)?.value ?? "7");
      void controller.runCompare(["direct", "two-phase/cluster-tsp"], trials, seed);
      break;
    }
    case "sort":
      controller.sortBy(target.dataset.key as never);
      break;
    case "accept-row":
      controller.acceptRow(target.dataset.path!, Number(target.dataset.trial));
      break;
    case "save-settings": {
      const form = target.closest("form");
      const settings: Record<string, unknown> = {};
      form?.querySelectorAll<HTMLInputElement>("input[data-setting]").forEach((input) => {
        settings[input.dataset.setting!] = input.type === "number" ? Number(input.value) : input.value;
      });
      void controller.saveSettings(nodeId, settings);
      break;
    }
  }
});

root.addEventListener("change", (event) => {
  const target = event.target as HTMLElement;
  if (target.dataset.action === "speed-weight") {
    void controller.setSpeedWeight(Number((target as HTMLInputElement).value));
  }
});

void controller.loadTypes().then(() => render(controller.state));
