/**
 * Thin API client that doubles as the blinding boundary.
 *
 * Every outbound path is checked against an allowlist, and query
 * payloads are rebuilt field-by-field, so nothing beyond the blinded
 * QueryView shape can reach rendering code even if the server (or a
 * proxy in between) starts sending more. The export endpoint is not on
 * the list on purpose: this client cannot be talked into calling it.
 */
export class BlindingError extends Error {
}
export class ApiError extends Error {
    constructor(status, detail) {
        super(detail);
        this.status = status;
    }
}
const ALLOWED_PATHS = [
    /^\/api\/study$/,
    /^\/api\/judge\/\d+\/next$/,
    /^\/api\/judge\/\d+\/rating$/,
    /^\/api\/image\/[0-9a-f]+$/,
];
const IMAGE_PATH = /^\/api\/image\/[0-9a-f]+$/;
export function assertAllowedPath(path) {
    if (!ALLOWED_PATHS.some((re) => re.test(path))) {
        throw new BlindingError(`refusing request outside the blinded surface: ${path}`);
    }
}
/**
 * Rebuild a next-query payload keeping only the whitelisted fields.
 * Unknown keys are dropped rather than copied, and image URLs must
 * point back into the opaque-token endpoint.
 */
export function toQueryView(raw) {
    const qid = raw["qid"];
    const left = raw["left"];
    const right = raw["right"];
    if (typeof qid !== "string" || typeof left !== "string" || typeof right !== "string") {
        throw new ApiError(0, "malformed query payload");
    }
    if (!IMAGE_PATH.test(left) || !IMAGE_PATH.test(right)) {
        throw new BlindingError(`image URL outside the blinded surface: ${left}, ${right}`);
    }
    return {
        qid,
        seq: Number(raw["seq"] ?? 0),
        total: Number(raw["total"] ?? 0),
        answered: Number(raw["answered"] ?? 0),
        left,
        right,
    };
}
async function errorDetail(resp) {
    try {
        const body = (await resp.json());
        if (typeof body.detail === "string") {
            return body.detail; // server rejection, surfaced verbatim
        }
    }
    catch {
        // non-JSON body, fall through to the generic message
    }
    return `request failed (${resp.status})`;
}
export function createClient(fetchFn) {
    const doFetch = fetchFn ?? ((path, init) => fetch(path, init));
    async function request(path, init) {
        assertAllowedPath(path);
        return doFetch(path, init);
    }
    return {
        async fetchStudy() {
            const resp = await request("/api/study");
            if (!resp.ok) {
                throw new ApiError(resp.status, await errorDetail(resp));
            }
            const body = (await resp.json());
            return {
                judges: Number(body["judges"] ?? 0),
                queriesPerJudge: Number(body["queries_per_judge"] ?? 0),
            };
        },
        async fetchNext(judge) {
            const resp = await request(`/api/judge/${judge}/next`);
            if (!resp.ok) {
                throw new ApiError(resp.status, await errorDetail(resp));
            }
            const body = (await resp.json());
            if (body["done"] === true) {
                return { kind: "done", total: Number(body["total"] ?? 0) };
            }
            return { kind: "query", view: toQueryView(body) };
        },
        async submitRating(judge, qid, score) {
            const resp = await request(`/api/judge/${judge}/rating`, {
                method: "POST",
                headers: { "Content-Type": "application/json" },
                body: JSON.stringify({ qid, score }),
            });
            if (resp.status === 409) {
                return { kind: "already-rated" };
            }
            if (!resp.ok) {
                throw new ApiError(resp.status, await errorDetail(resp));
            }
            const body = (await resp.json());
            return { kind: "recorded", remaining: Number(body["remaining"] ?? 0) };
        },
    };
}
