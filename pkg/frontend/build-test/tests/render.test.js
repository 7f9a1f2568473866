import assert from "node:assert/strict";
import { test } from "node:test";
import { escapeHtml, renderCandidates, renderCompletion, renderItem, renderReport, renderSelection, renderVocabulary, } from "../src/render.js";
const item = {
    image_id: "img_42",
    original: "nine",
    labels: [
        { label: "nine", score: 1.9, likelihood: 0.54 },
        { label: "four", score: 1.74, likelihood: 0.46 },
    ],
    diagnosis: "missing_label",
    image_url: "/images/img_42",
    context: "calibration",
    vocabulary: ["zero", "four", "nine"],
    margin: 0.12,
};
test("candidates render proportional bars with numeric likelihoods", () => {
    const html = renderCandidates(item, new Set());
    assert.match(html, /width:54%/);
    assert.match(html, /width:46%/);
    assert.match(html, /54\.0%/);
    assert.match(html, /46\.0%/);
    assert.match(html, /nine/);
    assert.match(html, /four/);
});
test("selected candidates are marked", () => {
    const html = renderCandidates(item, new Set(["nine"]));
    assert.match(html, /candidate selected" data-label="nine"/);
});
test("empty candidate list explains itself", () => {
    const html = renderCandidates({ ...item, labels: [] }, new Set());
    assert.match(html, /No label survived filtering/);
});
test("vocabulary options come only from the served vocabulary", () => {
    const html = renderVocabulary(item.vocabulary, new Set(), "");
    const labels = [...html.matchAll(/data-label="([^"]+)"/g)].map((m) => m[1]);
    assert.deepEqual(labels, ["zero", "four", "nine"]);
});
test("vocabulary filter narrows the grid", () => {
    const html = renderVocabulary(item.vocabulary, new Set(), "ni");
    assert.match(html, /nine/);
    assert.doesNotMatch(html, /zero/);
});
test("item view shows original label, diagnosis, and image", () => {
    const html = renderItem(item, new Set(), "");
    assert.match(html, /original label/);
    assert.match(html, /<strong>nine<\/strong>/);
    assert.match(html, /missing label/);
    assert.match(html, /\/images\/img_42/);
});
test("empty selection names the none-apply semantics", () => {
    assert.match(renderSelection(new Set()), /none apply/);
    assert.match(renderSelection(new Set(["cat"])), /cat/);
});
test("html is escaped everywhere labels flow", () => {
    const hostile = { ...item, original: `<script>alert("x")</script>` };
    const html = renderItem(hostile, new Set(), "");
    assert.doesNotMatch(html, /<script>alert/);
    assert.equal(escapeHtml("<&>'\""), "&lt;&amp;&gt;&#39;&quot;");
});
test("completion state renders when the queue drains", () => {
    assert.match(renderCompletion(), /Queue empty/);
});
test("report panel shows counts and expertise rows", () => {
    const report = {
        dataset_id: "fixture",
        image_count: 4,
        noisy_label_count: 0,
        missing_label_count: 4,
        threshold: 0.2,
        threshold_mode: "fraction_of_full_score",
        cutoff: 0.4,
        full_score: 2.0,
        top_k: 3,
        diagnosis_counts: {
            clean: 0,
            noisy_label: 0,
            missing_label: 4,
            noisy_and_missing: 0,
            unresolved: 0,
        },
    };
    const expertise = [
        { method: "alpha", est_acc: 0.625, coverage: 1.0, penalty: 0.625 },
    ];
    const html = renderReport(report, expertise);
    assert.match(html, /4 images/);
    assert.match(html, /alpha/);
    assert.match(html, /0\.625/);
});
