import assert from "node:assert/strict";
import { createServer, type Server } from "node:http";
import { after, before, test } from "node:test";

import { ApiError, ReviewClient } from "../src/api.js";

/** In-process stub speaking the review service's wire format. */
let server: Server;
let base = "";
const verdictLog: unknown[] = [];

before(async () => {
  server = createServer((req, res) => {
    const send = (status: number, body: unknown) => {
      const data = JSON.stringify(body);
      res.writeHead(status, { "Content-Type": "application/json" });
      res.end(data);
    };
    if (req.method === "GET" && req.url === "/queue") {
      send(200, {
        items: [
          { image_id: "img1", context: "calibration", diagnosis: "missing_label", margin: 0.1 },
        ],
      });
    } else if (req.method === "GET" && req.url === "/item/img1") {
      send(200, {
        image_id: "img1",
        original: "cat",
        labels: [{ label: "cat", score: 2.0, likelihood: 1.0 }],
        diagnosis: "missing_label",
        image_url: "/images/img1",
        context: "calibration",
        vocabulary: ["cat", "dog"],
        margin: 0.1,
      });
    } else if (req.method === "POST" && req.url === "/verdict") {
      let raw = "";
      req.on("data", (chunk) => (raw += chunk));
      req.on("end", () => {
        const body = JSON.parse(raw) as { labels: string[]; image_id: string };
        if (body.labels.includes("unicorn")) {
          send(400, { error: "labels not in vocabulary: ['unicorn']" });
          return;
        }
        verdictLog.push(body);
        send(200, {
          ok: true,
          verdict: { ...body, timestamp: "t", context: "calibration" },
        });
      });
    } else {
      send(404, { error: `no such endpoint ${req.url}` });
    }
  });
  await new Promise<void>((resolve) => server.listen(0, "127.0.0.1", resolve));
  const address = server.address();
  if (address && typeof address === "object") {
    base = `http://127.0.0.1:${address.port}`;
  }
});

after(() => {
  server.close();
});

test("queue and item round-trip through the client types", async () => {
  const client = new ReviewClient(base);
  const queue = await client.queue();
  assert.equal(queue.length, 1);
  assert.equal(queue[0]!.context, "calibration");
  const item = await client.item(queue[0]!.image_id);
  assert.equal(item.original, "cat");
  assert.equal(item.labels[0]!.likelihood, 1.0);
});

test("verdict submission returns the appended record", async () => {
  const client = new ReviewClient(base);
  const record = await client.submitVerdict({
    image_id: "img1",
    labels: ["dog"],
    reviewer: "t",
  });
  assert.equal(record.context, "calibration");
  assert.deepEqual(verdictLog.at(-1), { image_id: "img1", labels: ["dog"], reviewer: "t" });
});

test("server rejections surface as ApiError with the explanation", async () => {
  const client = new ReviewClient(base);
  await assert.rejects(
    client.submitVerdict({ image_id: "img1", labels: ["unicorn"], reviewer: "t" }),
    (error: unknown) => {
      assert.ok(error instanceof ApiError);
      assert.equal(error.status, 400);
      assert.match(error.message, /unicorn/);
      return true;
    },
  );
});

test("unknown endpoints raise with status 404", async () => {
  const client = new ReviewClient(base);
  await assert.rejects(client.item("ghost"), (error: unknown) => {
    assert.ok(error instanceof ApiError);
    assert.equal(error.status, 404);
    return true;
  });
});
