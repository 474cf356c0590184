// Application controller: every user action maps to exactly one service
// endpoint; state updates only from responses. Rendering is a callback so
// the controller runs identically in the browser and under tests.

import { ApiError, type Api } from "./api.js";
import {
  initialState,
  loadAccepted,
  persistAccepted,
  selectableNodes,
  type AppState,
  type KeyValueStore,
  type SortKey,
} from "./state.js";

const MAX_POLLS = 600;

export class Controller {
  state: AppState = initialState();

  constructor(
    private api: Api,
    private storage: KeyValueStore,
    private render: (state: AppState) => void,
    private pollIntervalMs = 2000,
    private sleep: (ms: number) => Promise<void> = (ms) => new Promise((r) => setTimeout(r, ms)),
  ) {}

  private emit(): void {
    this.render(this.state);
  }

  private setBanner(error: unknown): void {
    this.state.banner =
      error instanceof ApiError ? `${error.code}: ${error.message}` : `service unreachable: ${error}`;
    this.emit();
  }

  async loadTypes(): Promise<void> {
    try {
      this.state.problemTypes = await this.api.problemTypes();
      this.state.banner = null;
    } catch (error) {
      this.setBanner(error);
      return;
    }
    this.emit();
  }

  pickType(typeId: string): void {
    this.state.selectedType = typeId;
    this.state.screen = "editor";
    this.state.banner = null;
    this.emit();
  }

  backToPicker(): void {
    this.state.screen = "picker";
    this.emit();
  }

  setInput(text: string): void {
    this.state.inputText = text;
  }

  async submitProblem(): Promise<void> {
    if (!this.state.selectedType) return;
    try {
      const doc = await this.api.createProblem(this.state.selectedType, this.state.inputText);
      this.state.problem = doc;
      this.state.screen = "tree";
      this.state.banner = null;
      this.state.suggestions = {};
      this.state.accepted = loadAccepted(this.storage, doc.id);
      this.emit();
      await this.loadSuggestions(doc.tree.id);
    } catch (error) {
      this.setBanner(error);
    }
  }

  async loadSuggestions(nodeId: string): Promise<void> {
    if (!this.state.problem || !this.state.selectedType) return;
    try {
      const doc = await this.api.suggestions(
        this.state.selectedType,
        this.state.problem.id,
        nodeId,
        this.state.speedWeight,
      );
      this.state.suggestions[nodeId] = doc;
      this.emit();
    } catch (error) {
      this.setBanner(error);
    }
  }

  async setSpeedWeight(weight: number): Promise<void> {
    this.state.speedWeight = weight;
    const loaded = Object.keys(this.state.suggestions);
    this.state.suggestions = {};
    this.emit();
    for (const nodeId of loaded) {
      await this.loadSuggestions(nodeId);
    }
  }

  async selectSolver(nodeId: string, solverId: string): Promise<void> {
    if (!this.state.problem || !this.state.selectedType) return;
    try {
      const doc = await this.api.patchNode(this.state.selectedType, this.state.problem.id, nodeId, {
        solver_id: solverId,
      });
      this.state.problem = doc;
      this.state.banner = null;
      this.emit();
    } catch (error) {
      this.setBanner(error);
    }
  }

  async saveSettings(nodeId: string, settings: Record<string, unknown>): Promise<void> {
    if (!this.state.problem || !this.state.selectedType) return;
    try {
      this.state.problem = await this.api.patchNode(
        this.state.selectedType,
        this.state.problem.id,
        nodeId,
        { settings },
      );
      this.emit();
    } catch (error) {
      this.setBanner(error);
    }
  }

  async executeNode(nodeId: string, seed = this.state.seed): Promise<void> {
    if (!this.state.problem || !this.state.selectedType) return;
    try {
      await this.api.execute(this.state.selectedType, this.state.problem.id, {
        mode: "stepwise",
        node_id: nodeId,
        seed,
      });
      this.state.banner = null;
    } catch (error) {
      this.setBanner(error);
      return;
    }
    await this.pollUntilSettled();
    // fan-out may have added fresh selectable nodes; fetch their suggestions
    if (this.state.problem) {
      for (const node of selectableNodes(this.state.problem.tree)) {
        if (!(node.id in this.state.suggestions) && node.solver_id === null) {
          await this.loadSuggestions(node.id);
        }
      }
    }
  }

  async refreshTree(): Promise<void> {
    if (!this.state.problem || !this.state.selectedType) return;
    try {
      this.state.problem = await this.api.fetchProblem(this.state.selectedType, this.state.problem.id);
      this.emit();
    } catch (error) {
      this.setBanner(error);
    }
  }

  async pollUntilSettled(maxPolls = MAX_POLLS): Promise<void> {
    let previous = JSON.stringify(this.state.problem?.tree ?? {});
    for (let i = 0; i < maxPolls; i++) {
      await this.sleep(this.pollIntervalMs);
      await this.refreshTree();
      const current = JSON.stringify(this.state.problem?.tree ?? {});
      const solving = current.includes('"Solving"');
      if (!solving && current === previous) return;
      previous = current;
    }
  }

  inspect(nodeId: string): void {
    this.state.inspectedNodeId = nodeId;
    this.emit();
  }

  openCompare(): void {
    this.state.screen = "compare";
    this.emit();
  }

  backToTree(): void {
    this.state.screen = "tree";
    this.emit();
  }

  async runCompare(paths: string[], trials = this.state.trials, seed = this.state.seed): Promise<void> {
    if (!this.state.problem || !this.state.selectedType) return;
    this.state.trials = trials;
    this.state.seed = seed;
    try {
      const accepted = await this.api.compare(this.state.selectedType, this.state.problem.id, {
        paths,
        trials,
        seed,
      });
      this.state.comparisonId = accepted.comparison_id;
      this.state.comparisonRunning = true;
      this.state.report = null;
      this.state.banner = null;
      this.emit();
    } catch (error) {
      this.setBanner(error);
      return;
    }
    for (let i = 0; i < MAX_POLLS; i++) {
      await this.sleep(this.pollIntervalMs);
      const status = await this.api.comparison(
        this.state.selectedType,
        this.state.problem.id,
        this.state.comparisonId!,
      );
      if (status.status === "done" && status.report) {
        this.state.report = status.report;
        this.state.comparisonRunning = false;
        this.emit();
        return;
      }
      if (status.status === "failed") {
        this.state.comparisonRunning = false;
        this.state.banner = `comparison failed: ${status.message ?? "unknown"}`;
        this.emit();
        return;
      }
    }
    this.state.comparisonRunning = false;
    this.state.banner = "comparison timed out";
    this.emit();
  }

  sortBy(key: SortKey): void {
    if (this.state.sortKey === key) {
      this.state.sortAscending = !this.state.sortAscending;
    } else {
      this.state.sortKey = key;
      this.state.sortAscending = true;
    }
    this.emit();
  }

  acceptRow(path: string, trial: number): void {
    if (!this.state.problem || !this.state.report) return;
    const row = this.state.report.rows.find((r) => r.path === path && r.trial === trial);
    if (!row) return;
    this.state.accepted = { path, trial, objective: row.objective };
    persistAccepted(this.storage, this.state.problem.id, this.state.accepted);
    this.emit();
  }
}
