/** Wire protocol shared with the simulation service (JSON text frames). */

export interface RobotSnapshot {
  id: number;
  x: number;
  y: number;
  psi: number;
  mode: 0 | 1;
  theta_rot: number;
  arrived: boolean;
  collided: boolean;
  controlled: boolean;
  rays?: [number, number][];
}

export interface Snapshot {
  type: "snapshot";
  t: number;
  running: boolean;
  recording: boolean;
  episode: number;
  robots: RobotSnapshot[];
}

export interface ScenarioInfo {
  world: {
    bounds: [number, number, number, number];
    polygons: [number, number][][];
  };
  robots: { start: [number, number, number]; goal: [number, number] }[];
  params: Record<string, unknown>;
}

export interface InitMessage {
  type: "init";
  scenario: ScenarioInfo;
  controlled_ids: number[];
  t: number;
  running: boolean;
}

export interface AckMessage {
  type: "ack";
  command?: string;
  action?: string;
  [key: string]: unknown;
}

export interface ErrorMessage {
  type: "error";
  message: string;
}

export type ServerMessage = Snapshot | InitMessage | AckMessage | ErrorMessage;

export type ClientCommand =
  | { type: "toggle"; id: number }
  | { type: "control"; action: "pause" | "resume" | "step" | "reset" }
  | { type: "record"; action: "start" | "stop"; path?: string };
