import { describe, expect, test } from "vitest";

import { TunerStore } from "../src/state.js";

const MANIFEST = { keyHex: "#439f82", tola: 30, tolb: 35 };

describe("dirty tracking", () => {
  test("clean right after loading the manifest spec", () => {
    const store = new TunerStore();
    store.loadManifestSpec(MANIFEST);
    expect(store.dirty).toBe(false);
  });

  test("dirty exactly when the working spec differs", () => {
    const store = new TunerStore();
    store.loadManifestSpec(MANIFEST);
    store.editSpec({ tola: 28 });
    expect(store.dirty).toBe(true);
    store.editSpec({ tola: 30 });
    expect(store.dirty).toBe(false);
  });

  test("save marks the working spec as the manifest spec", () => {
    const store = new TunerStore();
    store.loadManifestSpec(MANIFEST);
    store.editSpec({ tolb: 40 });
    store.markSaved();
    expect(store.dirty).toBe(false);
    store.editSpec({ tolb: 35 });
    expect(store.dirty).toBe(true); // differs from the saved 40 now
  });
});

describe("validation state", () => {
  test("alpha >= beta is flagged invalid", () => {
    const store = new TunerStore();
    store.loadManifestSpec(MANIFEST);
    store.editSpec({ tola: 35 });
    expect(store.valid).toBe(false);
    expect(store.issues.join(" ")).toContain("tola < tolb");
  });

  test("recovers when the edit is corrected", () => {
    const store = new TunerStore();
    store.loadManifestSpec(MANIFEST);
    store.editSpec({ tola: 50 });
    store.editSpec({ tola: 20 });
    expect(store.valid).toBe(true);
  });
});

describe("eyedrop undo", () => {
  test("eyedrop then undo restores the previous spec", () => {
    const store = new TunerStore();
    store.loadManifestSpec(MANIFEST);
    store.applyEyedrop("#25806f");
    expect(store.spec.keyHex).toBe("#25806f");
    expect(store.canUndo).toBe(true);
    store.undo();
    expect(store.spec).toEqual(MANIFEST);
  });

  test("two picks undo in reverse order", () => {
    const store = new TunerStore();
    store.loadManifestSpec(MANIFEST);
    store.applyEyedrop("#111111");
    store.applyEyedrop("#222222");
    store.undo();
    expect(store.spec.keyHex).toBe("#111111");
    store.undo();
    expect(store.spec.keyHex).toBe("#439f82");
    expect(store.canUndo).toBe(false);
  });

  test("loading a manifest clears history", () => {
    const store = new TunerStore();
    store.loadManifestSpec(MANIFEST);
    store.applyEyedrop("#333333");
    store.loadManifestSpec(MANIFEST);
    expect(store.canUndo).toBe(false);
  });
});

describe("subscriptions", () => {
  test("listeners fire on edits and can unsubscribe", () => {
    const store = new TunerStore();
    let hits = 0;
    const off = store.subscribe(() => hits++);
    store.editSpec({ tola: 10 });
    off();
    store.editSpec({ tola: 11 });
    expect(hits).toBe(1);
  });
});
