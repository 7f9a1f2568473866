/** Typed client for the review service. Never invents data: everything the
 * UI shows comes straight from these endpoints. */
export class ApiError extends Error {
    status;
    constructor(status, message) {
        super(message);
        this.status = status;
        this.name = "ApiError";
    }
}
async function parseJson(response) {
    const text = await response.text();
    try {
        return text ? JSON.parse(text) : {};
    }
    catch {
        throw new ApiError(response.status, `invalid JSON from server: ${text.slice(0, 120)}`);
    }
}
export class ReviewClient {
    baseUrl;
    constructor(baseUrl = "") {
        this.baseUrl = baseUrl;
    }
    async get(path) {
        const response = await fetch(`${this.baseUrl}${path}`);
        const body = await parseJson(response);
        if (!response.ok) {
            const message = body.error ?? response.statusText;
            throw new ApiError(response.status, message);
        }
        return body;
    }
    async post(path, payload) {
        const response = await fetch(`${this.baseUrl}${path}`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(payload),
        });
        const body = await parseJson(response);
        if (!response.ok) {
            const message = body.error ?? response.statusText;
            throw new ApiError(response.status, message);
        }
        return body;
    }
    async queue() {
        const payload = await this.get("/queue");
        return payload.items;
    }
    async item(imageId) {
        return this.get(`/item/${encodeURIComponent(imageId)}`);
    }
    async submitVerdict(verdict) {
        const payload = await this.post("/verdict", verdict);
        return payload.verdict;
    }
    async recompute() {
        return this.post("/recompute", {});
    }
    async report() {
        return this.get("/report");
    }
    async expertise() {
        const payload = await this.get("/expertise");
        return payload.expertise;
    }
}
