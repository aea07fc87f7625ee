/**
 * Judge session state machine.
 *
 * The server is the only authority on progress; this module walks
 * next-query -> rate -> submit and guards the POST so one query can
 * never be scored twice from the same screen (double clicks, Enter
 * mashing, slow networks). Refreshing the page loses nothing because
 * nothing is persisted here: the server hands back the next unrated
 * query on restart.
 */
import { ApiError } from "./api.js";
const FRESH = {
    phase: "loading",
    view: null,
    selected: null,
    leftLoaded: false,
    rightLoaded: false,
    loadFailed: false,
    error: null,
    total: 0,
};
export class JudgeSession {
    constructor(client, judge, onChange = () => { }) {
        this.client = client;
        this.judge = judge;
        this.onChange = onChange;
        this.state = { ...FRESH };
        this.inFlight = false;
    }
    snapshot() {
        return { ...this.state };
    }
    emit(patch) {
        this.state = { ...this.state, ...patch };
        this.onChange(this.snapshot());
    }
    async start() {
        await this.advance();
    }
    async advance() {
        this.emit({
            ...FRESH,
            phase: "loading",
            total: this.state.total,
        });
        try {
            const next = await this.client.fetchNext(this.judge);
            if (next.kind === "done") {
                this.emit({ phase: "done", total: next.total });
            }
            else {
                this.emit({ phase: "rating", view: next.view, total: next.view.total });
            }
        }
        catch (err) {
            this.emit({ phase: "failed", error: message(err) });
        }
    }
    imagesReady() {
        return this.state.leftLoaded && this.state.rightLoaded && !this.state.loadFailed;
    }
    imageLoaded(side) {
        this.emit(side === "left" ? { leftLoaded: true } : { rightLoaded: true });
    }
    /** Any pane failing keeps the rating controls disabled until retry. */
    imageFailed() {
        this.emit({ loadFailed: true });
    }
    retryImages() {
        this.emit({ leftLoaded: false, rightLoaded: false, loadFailed: false });
    }
    select(score) {
        if (this.state.phase !== "rating") {
            return;
        }
        if (!Number.isInteger(score) || score < 1 || score > 5) {
            return;
        }
        this.emit({ selected: score });
    }
    canSubmit() {
        return (this.state.phase === "rating" &&
            this.state.selected !== null &&
            this.imagesReady() &&
            !this.inFlight);
    }
    /** Returns true when a rating was actually recorded. */
    async submit() {
        if (!this.canSubmit() || this.state.view === null) {
            return false;
        }
        this.inFlight = true;
        this.emit({ phase: "submitting", error: null });
        try {
            const result = await this.client.submitRating(this.judge, this.state.view.qid, this.state.selected);
            // "already-rated" means another tab or an earlier retry got here
            // first; the server's count is authoritative, so skip forward
            // without scoring the query again.
            this.inFlight = false;
            await this.advance();
            return result.kind === "recorded";
        }
        catch (err) {
            this.inFlight = false;
            if (err instanceof ApiError) {
                this.emit({ phase: "rating", error: err.message });
            }
            else {
                this.emit({ phase: "rating", error: message(err) });
            }
            return false;
        }
    }
}
function message(err) {
    return err instanceof Error ? err.message : String(err);
}
