import { CSV_FIELDS } from "../src/csv";

export const HEADER = CSV_FIELDS.join(",");

function rows(lines: string[]): string {
  return [HEADER, ...lines].join("\n") + "\n";
}

/** Small two-kind sweep in the shape of the (m=50, d=500) configuration. */
export const FIG1_LEFT = rows([
  "fig1-m50-d500,ChiSqCount,0,10000,50,500,0,0.032000000000000001,0.96799999999999997,0.032000000000000001,0.0017594999857914781,10000,20260816",
  "fig1-m50-d500,SignCount,0,10000,50,500,0,0.033000000000000002,0.96699999999999997,0.033000000000000002,0.0017865021690827364,10000,20260816",
  "fig1-m50-d500,ChiSqCount,0.5,10000,50,500,0.5,0.031,0.116,0.88400000000000001,0.0032023116331538175,10000,20260816",
  "fig1-m50-d500,SignCount,0.5,10000,50,500,0.5,0.032000000000000001,0.52200000000000002,0.47799999999999998,0.0049951375856713317,10000,20260816",
  "fig1-m50-d500,ChiSqCount,1,10000,50,500,1,0.033000000000000002,0,1,0,10000,20260816",
  "fig1-m50-d500,SignCount,1,10000,50,500,1,0.034000000000000002,0.019,0.98099999999999998,0.0013650849424356936,10000,20260816",
]);

/** Companion panel in the shape of the (m=5000, d=5) configuration. */
export const FIG1_RIGHT = rows([
  "fig1-m5000-d5,ChiSqCount,0,10000,5000,5,0,0.049000000000000002,0.95099999999999996,0.049000000000000002,0.0021588191216162529,10000,20260816",
  "fig1-m5000-d5,SignCount,0,10000,5000,5,0,0.048000000000000001,0.95199999999999996,0.048000000000000001,0.0021373348192492708,10000,20260816",
  "fig1-m5000-d5,ChiSqCount,0.5,10000,5000,5,0.5,0.050000000000000003,0.248,0.752,0.0043186108414356879,10000,20260816",
  "fig1-m5000-d5,SignCount,0.5,10000,5000,5,0.5,0.049000000000000002,0.052999999999999999,0.94699999999999995,0.0022407587881400976,10000,20260816",
  "fig1-m5000-d5,ChiSqCount,1,10000,5000,5,1,0.047,0,1,0,10000,20260816",
  "fig1-m5000-d5,SignCount,1,10000,5000,5,1,0.048000000000000001,0.035999999999999997,0.96399999999999997,0.0018634107652247589,10000,20260816",
]);

/** One kind only, one grid point: the minimal valid chart input. */
export const SINGLE_SERIES = rows([
  "mini,ChiSqCount,0.25,100,4,8,0.25,0.05,0.80000000000000004,0.19999999999999998,0.04,100,7",
]);
