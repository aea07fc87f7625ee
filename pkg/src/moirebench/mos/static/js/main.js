/**
 * Entry point: judge picker, then the blinded rating screen.
 *
 * The screen shows one query at a time as panes A and B with a shared
 * viewport (wheel to zoom, drag or arrow keys to pan, 0 to refit).
 * Keys 1-5 pick a score, Enter submits. All progress lives on the
 * server; reloading the page resumes at the next unrated query.
 */
import { createClient } from "./api.js";
import { JudgeSession } from "./session.js";
import { initialViewport, panBy, toCssTransform, zoomStep, } from "./viewport.js";
const SCORE_HINTS = {
    1: "B much worse",
    2: "B worse",
    3: "about the same",
    4: "B better",
    5: "B much better",
};
const PAN_STEP_PX = 80;
function el(tag, className, text) {
    const node = document.createElement(tag);
    if (className) {
        node.className = className;
    }
    if (text !== undefined) {
        node.textContent = text;
    }
    return node;
}
function appRoot() {
    const root = document.getElementById("app");
    if (!root) {
        throw new Error("missing #app container");
    }
    return root;
}
async function renderPicker(client) {
    const root = appRoot();
    root.replaceChildren();
    const card = el("div", "card");
    card.append(el("h1", undefined, "Opinion study"));
    try {
        const shape = await client.fetchStudy();
        card.append(el("p", "hint", `${shape.judges} judge seats, ${shape.queriesPerJudge} comparisons each. Pick your seat:`));
        const grid = el("div", "judge-grid");
        for (let j = 0; j < shape.judges; j++) {
            const btn = el("button", "judge-btn", `Judge ${j + 1}`);
            btn.addEventListener("click", () => {
                location.search = `?judge=${j}`;
            });
            grid.append(btn);
        }
        card.append(grid);
    }
    catch (err) {
        card.append(el("p", "error", err instanceof Error ? err.message : String(err)));
    }
    root.append(card);
}
function buildPane(label) {
    const wrap = el("div", "pane");
    const img = el("img");
    img.draggable = false;
    img.alt = `image ${label}`;
    wrap.append(img, el("span", "pane-label", label));
    return { wrap, img };
}
function renderSession(client, judge) {
    const root = appRoot();
    root.replaceChildren();
    const header = el("header");
    const progress = el("div", "progress-text");
    const bar = el("div", "progress-bar");
    const barFill = el("div", "progress-fill");
    bar.append(barFill);
    header.append(progress, bar);
    const stage = el("div", "stage");
    const left = buildPane("A");
    const right = buildPane("B");
    stage.append(left.wrap, right.wrap);
    const controls = el("div", "controls");
    const question = el("p", "question", "How does B compare to A?");
    const scoreRow = el("div", "score-row");
    const scoreButtons = [];
    for (let s = 1; s <= 5; s++) {
        const btn = el("button", "score-btn");
        btn.append(el("span", "score-num", String(s)));
        btn.append(el("span", "score-hint", SCORE_HINTS[s]));
        btn.addEventListener("click", () => {
            session.select(s);
        });
        scoreButtons.push(btn);
        scoreRow.append(btn);
    }
    const submit = el("button", "submit-btn", "Submit rating");
    submit.addEventListener("click", () => {
        void session.submit();
    });
    const retry = el("button", "retry-btn", "Retry loading images");
    retry.hidden = true;
    retry.addEventListener("click", () => {
        session.retryImages();
        loadImages();
    });
    const status = el("p", "status");
    const hint = el("p", "hint", "Keys: 1-5 score, Enter submit, arrows pan, +/- zoom, 0 fit");
    controls.append(question, scoreRow, submit, retry, status, hint);
    root.append(header, stage, controls);
    // one viewport drives both panes; that is the whole sync story
    let view = { scale: 0, cx: 0, cy: 0 };
    function geometryFor(pane) {
        const w = pane.img.naturalWidth;
        const h = pane.img.naturalHeight;
        if (!w || !h) {
            return null;
        }
        return {
            imgW: w,
            imgH: h,
            paneW: pane.wrap.clientWidth,
            paneH: pane.wrap.clientHeight,
        };
    }
    function paintViewports() {
        for (const pane of [left, right]) {
            const geo = geometryFor(pane);
            if (geo) {
                pane.img.style.transform = toCssTransform(view, geo);
            }
        }
    }
    function resetViewport() {
        const geo = geometryFor(left);
        view = geo ? initialViewport(geo) : { scale: 0, cx: 0, cy: 0 };
        paintViewports();
    }
    function loadImages() {
        const state = session.snapshot();
        if (!state.view) {
            return;
        }
        // no-store on the server side; clearing src first forces a refetch
        left.img.removeAttribute("src");
        right.img.removeAttribute("src");
        left.img.src = state.view.left;
        right.img.src = state.view.right;
    }
    left.img.addEventListener("load", () => {
        session.imageLoaded("left");
        resetViewport();
    });
    right.img.addEventListener("load", () => {
        session.imageLoaded("right");
        resetViewport();
    });
    left.img.addEventListener("error", () => {
        if (left.img.getAttribute("src")) {
            session.imageFailed();
        }
    });
    right.img.addEventListener("error", () => {
        if (right.img.getAttribute("src")) {
            session.imageFailed();
        }
    });
    for (const pane of [left, right]) {
        pane.wrap.addEventListener("wheel", (ev) => {
            ev.preventDefault();
            const geo = geometryFor(pane);
            if (!geo) {
                return;
            }
            const rect = pane.wrap.getBoundingClientRect();
            view = zoomStep(view, geo, ev.deltaY < 0 ? 1 : -1, ev.clientX - rect.left, ev.clientY - rect.top);
            paintViewports();
        });
        let dragging = false;
        let lastX = 0;
        let lastY = 0;
        pane.wrap.addEventListener("pointerdown", (ev) => {
            dragging = true;
            lastX = ev.clientX;
            lastY = ev.clientY;
            pane.wrap.setPointerCapture(ev.pointerId);
        });
        pane.wrap.addEventListener("pointermove", (ev) => {
            if (!dragging) {
                return;
            }
            const geo = geometryFor(pane);
            if (!geo) {
                return;
            }
            view = panBy(view, geo, ev.clientX - lastX, ev.clientY - lastY);
            lastX = ev.clientX;
            lastY = ev.clientY;
            paintViewports();
        });
        pane.wrap.addEventListener("pointerup", () => {
            dragging = false;
        });
    }
    document.addEventListener("keydown", (ev) => {
        if (ev.key >= "1" && ev.key <= "5") {
            session.select(Number(ev.key));
            return;
        }
        const geo = geometryFor(left);
        if (ev.key === "Enter") {
            void session.submit();
        }
        else if (geo && (ev.key === "+" || ev.key === "=")) {
            view = zoomStep(view, geo, 1);
            paintViewports();
        }
        else if (geo && ev.key === "-") {
            view = zoomStep(view, geo, -1);
            paintViewports();
        }
        else if (geo && ev.key === "0") {
            resetViewport();
        }
        else if (geo && ev.key.startsWith("Arrow")) {
            ev.preventDefault();
            const dx = ev.key === "ArrowLeft" ? PAN_STEP_PX : ev.key === "ArrowRight" ? -PAN_STEP_PX : 0;
            const dy = ev.key === "ArrowUp" ? PAN_STEP_PX : ev.key === "ArrowDown" ? -PAN_STEP_PX : 0;
            view = panBy(view, geo, dx, dy);
            paintViewports();
        }
    });
    function render(state) {
        if (state.phase === "done") {
            root.replaceChildren();
            const card = el("div", "card");
            card.append(el("h1", undefined, "All done"));
            card.append(el("p", undefined, `You rated all ${state.total} comparisons. Progress: 100%.`));
            root.append(card);
            return;
        }
        if (state.phase === "failed") {
            progress.textContent = "Session error";
            status.textContent = state.error ?? "unknown error";
            status.classList.add("error");
            return;
        }
        const v = state.view;
        if (v) {
            progress.textContent = `Query ${v.answered + 1} of ${v.total}`;
            barFill.style.width = `${(v.answered / Math.max(v.total, 1)) * 100}%`;
        }
        else {
            progress.textContent = "Loading...";
        }
        scoreButtons.forEach((btn, i) => {
            btn.classList.toggle("selected", state.selected === i + 1);
            btn.disabled = state.phase !== "rating" || !session.imagesReady();
        });
        submit.disabled = !session.canSubmit();
        submit.textContent = state.phase === "submitting" ? "Submitting..." : "Submit rating";
        retry.hidden = !state.loadFailed;
        status.classList.toggle("error", state.error !== null);
        if (state.error) {
            status.textContent = state.error;
        }
        else if (state.loadFailed) {
            status.textContent = "An image failed to load; rating is paused.";
        }
        else if (state.phase === "rating" && !session.imagesReady()) {
            status.textContent = "Loading images...";
        }
        else {
            status.textContent = "";
        }
    }
    let lastQid = null;
    const session = new JudgeSession(client, judge, (state) => {
        render(state);
        if (state.view && state.view.qid !== lastQid) {
            lastQid = state.view.qid;
            loadImages();
        }
    });
    void session.start();
}
function boot() {
    const client = createClient();
    const judgeParam = new URLSearchParams(location.search).get("judge");
    if (judgeParam === null || judgeParam === "") {
        void renderPicker(client);
    }
    else {
        renderSession(client, Number(judgeParam));
    }
}
boot();
