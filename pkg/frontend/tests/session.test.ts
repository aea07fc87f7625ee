import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, NextResult, QueryView, RatingResult } from "../src/api.js";
import { JudgeSession } from "../src/session.js";

function view(qid: string, answered: number): QueryView {
  return {
    qid,
    seq: answered,
    total: 2,
    answered,
    left: `/api/image/${"a".repeat(32)}`,
    right: `/api/image/${"b".repeat(32)}`,
  };
}

interface FakeClient extends ApiClient {
  posted: Array<{ qid: string; score: number }>;
}

/** Client whose next/rating behavior is scripted per call. */
function fakeClient(
  nexts: NextResult[],
  onRating?: () => Promise<RatingResult> | RatingResult
): FakeClient {
  let nextIdx = 0;
  const posted: Array<{ qid: string; score: number }> = [];
  return {
    posted,
    async fetchStudy() {
      return { judges: 1, queriesPerJudge: 2 };
    },
    async fetchNext() {
      return nexts[Math.min(nextIdx++, nexts.length - 1)];
    },
    async submitRating(_judge: number, qid: string, score: number) {
      posted.push({ qid, score });
      if (onRating) {
        return onRating();
      }
      return { kind: "recorded", remaining: 1 } as RatingResult;
    },
  };
}

function readySession(client: ApiClient): JudgeSession {
  return new JudgeSession(client, 0);
}

async function startRated(session: JudgeSession, score: number): Promise<void> {
  await session.start();
  session.imageLoaded("left");
  session.imageLoaded("right");
  session.select(score);
}

describe("double-submit guard", () => {
  it("two rapid submits produce exactly one POST", async () => {
    let release: (r: RatingResult) => void = () => {};
    const gate = new Promise<RatingResult>((resolve) => {
      release = resolve;
    });
    const client = fakeClient(
      [
        { kind: "query", view: view("j00-0000", 0) },
        { kind: "done", total: 2 },
      ],
      () => gate
    );
    const session = readySession(client);
    await startRated(session, 4);

    const first = session.submit();
    const second = session.submit(); // lands while the first is in flight
    release({ kind: "recorded", remaining: 1 });
    const [a, b] = await Promise.all([first, second]);

    expect(client.posted).toHaveLength(1);
    expect(a).toBe(true);
    expect(b).toBe(false);
  });

  it("submit is refused until a score is selected and images loaded", async () => {
    const client = fakeClient([{ kind: "query", view: view("j00-0000", 0) }]);
    const session = readySession(client);
    await session.start();

    expect(session.canSubmit()).toBe(false); // nothing selected, images pending
    session.select(3);
    expect(session.canSubmit()).toBe(false); // images still pending
    expect(await session.submit()).toBe(false);
    expect(client.posted).toHaveLength(0);

    session.imageLoaded("left");
    session.imageLoaded("right");
    expect(session.canSubmit()).toBe(true);
  });
});

describe("server-state resynchronization", () => {
  it("409 already-rated skips forward without double-counting", async () => {
    const client = fakeClient(
      [
        { kind: "query", view: view("j00-0000", 0) },
        { kind: "query", view: view("j00-0001", 1) },
      ],
      () => ({ kind: "already-rated" }) as RatingResult
    );
    const session = readySession(client);
    await startRated(session, 2);

    const counted = await session.submit();
    expect(counted).toBe(false); // not recorded by this screen
    const state = session.snapshot();
    expect(state.phase).toBe("rating");
    expect(state.view?.qid).toBe("j00-0001"); // resynced to server truth
    expect(state.selected).toBeNull();
  });

  it("rejections surface verbatim and keep the query in place", async () => {
    const client = fakeClient([{ kind: "query", view: view("j00-0000", 0) }], () => {
      throw new ApiError(422, "score 9 outside 1..5");
    });
    const session = readySession(client);
    await startRated(session, 5);

    expect(await session.submit()).toBe(false);
    const state = session.snapshot();
    expect(state.phase).toBe("rating");
    expect(state.error).toBe("score 9 outside 1..5");
    expect(state.view?.qid).toBe("j00-0000");
  });

  it("reaches the done screen after the last rating", async () => {
    const client = fakeClient([
      { kind: "query", view: view("j00-0001", 1) },
      { kind: "done", total: 2 },
    ]);
    const session = readySession(client);
    await startRated(session, 3);
    expect(await session.submit()).toBe(true);
    expect(session.snapshot().phase).toBe("done");
    expect(session.snapshot().total).toBe(2);
  });
});

describe("image-load gating", () => {
  it("a failed pane disables rating until retry succeeds", async () => {
    const client = fakeClient([{ kind: "query", view: view("j00-0000", 0) }]);
    const session = readySession(client);
    await session.start();
    session.select(4);

    session.imageLoaded("left");
    session.imageFailed();
    expect(session.imagesReady()).toBe(false);
    expect(session.canSubmit()).toBe(false);
    expect(session.snapshot().loadFailed).toBe(true);

    session.retryImages();
    expect(session.snapshot().loadFailed).toBe(false);
    session.imageLoaded("left");
    session.imageLoaded("right");
    expect(session.imagesReady()).toBe(true);
    expect(session.canSubmit()).toBe(true);
  });

  it("ignores out-of-range or non-integer score selections", async () => {
    const client = fakeClient([{ kind: "query", view: view("j00-0000", 0) }]);
    const session = readySession(client);
    await session.start();
    session.select(0);
    session.select(6);
    session.select(2.5);
    expect(session.snapshot().selected).toBeNull();
    session.select(5);
    expect(session.snapshot().selected).toBe(5);
  });
});
